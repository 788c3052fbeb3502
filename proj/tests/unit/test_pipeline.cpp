// Copyright 2026 The zscir Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"
#include "zscir/experiments/world.hpp"
#include "zscir/pipeline/backends.hpp"
#include "zscir/pipeline/dataset.hpp"
#include "zscir/pipeline/image_record.hpp"
#include "zscir/pipeline/pairs.hpp"
#include "zscir/pipeline/prompt.hpp"
#include "zscir/pipeline/schema.hpp"

namespace zscir {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

ImageRecord Record(const std::string& id, std::optional<std::string> meta = std::nullopt,
                   Split split = Split::kIndex) {
  ImageRecord r;
  r.id = id;
  r.pixels = Image(2, 2, 3);
  r.meta_class = std::move(meta);
  r.split = split;
  return r;
}

AttributeSchema ShirtSchema() {
  return AttributeSchema(std::vector<Attribute>{{"object", {"dress", "shirt"}},
                          {"color", {"red", "blue"}},
                          {"pattern", {"none", "floral"}},
                          {"style", {"none", "strapless"}}});
}

// ---- records and collections ----

TEST(Collection, RejectsDuplicateIds) {
  EXPECT_EQ(CodeOf([] { Collection({Record("a"), Record("a")}); }), ErrorCode::kDuplicateId);
}

TEST(Collection, RejectsOutOfRangePixels) {
  ImageRecord r = Record("a");
  r.pixels.pixels[0] = 1.5;
  EXPECT_THROW(Collection({r}), Error);
  r.pixels.pixels[0] = std::nan("");
  EXPECT_THROW(Collection({r}), Error);
}

TEST(Collection, RejectsMixedShapes) {
  ImageRecord b = Record("b");
  b.pixels = Image(3, 2, 3);
  EXPECT_THROW(Collection({Record("a"), b}), Error);
}

TEST(Collection, LookupAndSplits) {
  const Collection c({Record("a", "x", Split::kQuery), Record("b", "x"), Record("c", "y")});
  EXPECT_TRUE(c.contains("b"));
  EXPECT_FALSE(c.contains("z"));
  EXPECT_EQ(CodeOf([&] { c.at("z"); }), ErrorCode::kDanglingId);
  EXPECT_EQ(c.WithSplit(Split::kQuery).size(), 1u);
  EXPECT_EQ(c.WithSplit(Split::kIndex).size(), 2u);
  EXPECT_EQ(ParseSplit(SplitName(Split::kTrain)), Split::kTrain);
}

TEST(Collection, FileRoundTrip) {
  SyntheticWorldConfig wc;
  wc.n_images = 20;
  const Collection c = GenerateWorld(wc);
  testing::TempDir dir("collection");
  WriteCollection(dir.path() / "c.jsonl", c);
  const Collection back = ReadCollection(dir.path() / "c.jsonl");
  ASSERT_EQ(back.size(), c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.images()[i].id, c.images()[i].id);
    EXPECT_EQ(back.images()[i].pixels, c.images()[i].pixels);
    EXPECT_EQ(back.images()[i].attributes, c.images()[i].attributes);
    EXPECT_EQ(back.images()[i].meta_class, c.images()[i].meta_class);
    EXPECT_EQ(back.images()[i].split, c.images()[i].split);
  }
}

TEST(Words, SplitAndCount) {
  EXPECT_EQ(WordCount("  change color  from red "), 4u);
  EXPECT_EQ(WordCount(""), 0u);
  EXPECT_EQ(SplitWords("a b"), (std::vector<std::string>{"a", "b"}));
}

// ---- schema ----

TEST(Schema, DefaultHas480Tuples) {
  const AttributeSchema s = AttributeSchema::Default();
  EXPECT_EQ(s.TupleCount(), 480u);
  EXPECT_EQ(s.attributes().front().name, "object");
}

TEST(Schema, TupleEnumerationIsMixedRadix) {
  const AttributeSchema s = ShirtSchema();
  EXPECT_EQ(s.TupleCount(), 16u);
  const AttributeTuple t0 = s.TupleAt(0), t1 = s.TupleAt(1), t15 = s.TupleAt(15);
  EXPECT_EQ(t0.at("style"), "none");
  EXPECT_EQ(t1.at("style"), "strapless");
  EXPECT_EQ(t1.at("object"), "dress");
  EXPECT_EQ(t15.at("object"), "shirt");
  std::set<AttributeTuple> all;
  for (size_t i = 0; i < s.TupleCount(); ++i) {
    all.insert(s.TupleAt(i));
    EXPECT_EQ(s.Encode(s.TupleAt(i)).size(), 4u);
  }
  EXPECT_EQ(all.size(), 16u);
}

TEST(Schema, RejectsAmbiguousValues) {
  EXPECT_THROW(AttributeSchema(std::vector<Attribute>{{"object", {"dress"}}, {"color", {"dress"}}}), Error);
  EXPECT_THROW(AttributeSchema(std::vector<Attribute>{{"object", {"two words"}}}), Error);
  EXPECT_THROW(AttributeSchema(std::vector<Attribute>{{"color", {"red"}}}), Error);  // no object attribute
}

TEST(Schema, AttributeDistanceCountsDifferences) {
  const AttributeSchema s = ShirtSchema();
  EXPECT_EQ(AttributeDistance(s.TupleAt(0), s.TupleAt(0)), 0);
  EXPECT_EQ(AttributeDistance(s.TupleAt(0), s.TupleAt(1)), 1);
  EXPECT_EQ(AttributeDistance(s.TupleAt(0), s.TupleAt(15)), 4);
}

// ---- pair sampling ----

TEST(Pairs, TwoImagesGlobalGivesBothOrders) {
  const Collection c({Record("a"), Record("b")});
  PairSamplingConfig cfg{PairStrategy::kGlobalRandom, 2, 5, true};
  const auto pairs = SamplePairs(c, cfg);
  ASSERT_EQ(pairs.size(), 2u);
  const std::set<ImagePair> got(pairs.begin(), pairs.end());
  EXPECT_EQ(got, (std::set<ImagePair>{{"a", "b"}, {"b", "a"}}));
}

TEST(Pairs, InsufficientSameClassPairs) {
  const Collection c({Record("a", "dress"), Record("b", "dress"), Record("c", "tops")});
  PairSamplingConfig cfg{PairStrategy::kSameMetaClass, 3, 0, true};
  EXPECT_EQ(CodeOf([&] { SamplePairs(c, cfg); }), ErrorCode::kInsufficientPairs);
  cfg.n_pairs = 2;
  EXPECT_EQ(SamplePairs(c, cfg).size(), 2u);
}

TEST(Pairs, MissingMetaClass) {
  const Collection c({Record("a", "dress"), Record("b")});
  PairSamplingConfig cfg{PairStrategy::kSameMetaClass, 1, 0, true};
  EXPECT_EQ(CodeOf([&] { SamplePairs(c, cfg); }), ErrorCode::kMissingMetaClass);
}

TEST(Pairs, NonPositiveCountIsConfigError) {
  const Collection c({Record("a"), Record("b")});
  PairSamplingConfig cfg{PairStrategy::kGlobalRandom, 0, 0, true};
  EXPECT_EQ(CodeOf([&] { SamplePairs(c, cfg); }), ErrorCode::kInvalidConfig);
}

TEST(Pairs, DeterministicAndWellFormed) {
  std::vector<ImageRecord> recs;
  for (int i = 0; i < 100; ++i) recs.push_back(Record("img" + std::to_string(i), i % 3 == 0 ? "x" : "y"));
  const Collection c(recs);
  for (PairStrategy strategy : {PairStrategy::kSameMetaClass, PairStrategy::kGlobalRandom}) {
    for (int64_t n : {50, 2000}) {
      PairSamplingConfig cfg{strategy, n, 7, true};
      const auto a = SamplePairs(c, cfg), b = SamplePairs(c, cfg);
      EXPECT_EQ(a, b);
      ASSERT_EQ(a.size(), static_cast<size_t>(n));
      std::set<ImagePair> seen;
      for (const auto& [r, t] : a) {
        EXPECT_NE(r, t);
        EXPECT_TRUE(seen.insert({r, t}).second);
        if (strategy == PairStrategy::kSameMetaClass) EXPECT_EQ(c.at(r).meta_class, c.at(t).meta_class);
      }
      cfg.seed = 8;
      EXPECT_NE(SamplePairs(c, cfg), a);
    }
  }
}

TEST(Pairs, ExhaustiveRequestReturnsEveryPair) {
  std::vector<ImageRecord> recs;
  for (int i = 0; i < 6; ++i) recs.push_back(Record(std::to_string(i), "x"));
  const Collection c(recs);
  PairSamplingConfig cfg{PairStrategy::kSameMetaClass, 30, 1, true};
  const auto pairs = SamplePairs(c, cfg);
  EXPECT_EQ(std::set<ImagePair>(pairs.begin(), pairs.end()).size(), 30u);
}

TEST(Pairs, WithoutDedupeMayExceedDistinctCount) {
  const Collection c({Record("a"), Record("b")});
  PairSamplingConfig cfg{PairStrategy::kGlobalRandom, 10, 0, false};
  const auto pairs = SamplePairs(c, cfg);
  EXPECT_EQ(pairs.size(), 10u);
  for (const auto& [r, t] : pairs) EXPECT_NE(r, t);
}

// ---- prompt ----

TEST(Prompt, TemplateIsByteExact) {
  const std::string p = RenderReformulationPrompt("a red dress", "a blue dress");
  EXPECT_EQ(p,
            "You have two captions for two images, image A and image B, you are supposed to write a reformulation "
            "text describing changing from image A to image B.\n"
            "caption A: a red dress\n"
            "caption B: a blue dress\n"
            "answer should be concise and within 12 words, only contain normal words, do not use special "
            "characters.\n"
            "Difference:");
  EXPECT_EQ(RenderReformulationPrompt("x", "y"), RenderReformulationPrompt("x", "y"));
}

TEST(Prompt, BlankCaptionIsRejected) {
  EXPECT_EQ(CodeOf([] { RenderReformulationPrompt("", "a blue dress"); }), ErrorCode::kEmptyCaption);
  EXPECT_EQ(CodeOf([] { RenderReformulationPrompt("a", "   "); }), ErrorCode::kEmptyCaption);
}

// ---- backends ----

TEST(OracleCaption, GrammarExamples) {
  OracleCaptionBackend oracle(ShirtSchema());
  EXPECT_EQ(oracle.CaptionFor({{"object", "dress"}, {"color", "red"}, {"pattern", "none"}, {"style", "strapless"}}),
            "a red strapless dress");
  EXPECT_EQ(oracle.CaptionFor({{"object", "shirt"}, {"color", "blue"}, {"pattern", "floral"}, {"style", "none"}}),
            "a blue floral shirt");
  ImageRecord r = Record("a");
  r.attributes = AttributeTuple{{"object", "dress"}, {"color", "red"}, {"pattern", "none"}, {"style", "none"}};
  const CaptionRecord c1 = Caption(r, oracle), c2 = Caption(r, oracle);
  EXPECT_EQ(c1.text, "a red dress");
  EXPECT_EQ(c1.text, c2.text);
  EXPECT_EQ(c1.image_id, "a");
  EXPECT_EQ(c1.backend_id, oracle.id());
}

TEST(OracleCaption, InjectiveOverDefaultSchema) {
  const AttributeSchema s = AttributeSchema::Default();
  OracleCaptionBackend oracle(s);
  std::set<std::string> captions;
  for (size_t i = 0; i < s.TupleCount(); ++i) captions.insert(oracle.CaptionFor(s.TupleAt(i)));
  EXPECT_EQ(captions.size(), s.TupleCount());
}

TEST(OracleReformulation, Examples) {
  OracleReformulationBackend oracle(ShirtSchema());
  EXPECT_EQ(Reformulate("a red strapless dress", "a blue strapless dress", oracle), "change color from red to blue");
  EXPECT_EQ(Reformulate("a red dress", "a red dress", oracle), "keep the item the same");
}

TEST(OracleReformulation, TwoDifferencesKeepBothClausesWithinCap) {
  const AttributeSchema s = ShirtSchema();
  OracleCaptionBackend cap(s);
  OracleReformulationBackend oracle(s);
  int checked = 0;
  for (size_t i = 0; i < s.TupleCount(); ++i) {
    for (size_t j = 0; j < s.TupleCount(); ++j) {
      const AttributeTuple a = s.TupleAt(i), b = s.TupleAt(j);
      if (AttributeDistance(a, b) != 2) continue;
      const std::string text = Reformulate(cap.CaptionFor(a), cap.CaptionFor(b), oracle);
      EXPECT_LE(WordCount(text), 12u) << text;
      EXPECT_NE(text.find(" and "), std::string::npos) << text;
      for (const Attribute& attr : s.attributes()) {
        if (a.at(attr.name) == b.at(attr.name)) continue;
        EXPECT_NE(text.find(attr.name + " from " + a.at(attr.name) + " to " + b.at(attr.name)), std::string::npos)
            << text;
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(OracleReformulation, DirectionMattersAndCapHolds) {
  const AttributeSchema s = AttributeSchema::Default();
  OracleCaptionBackend cap(s);
  OracleReformulationBackend oracle(s);
  for (size_t i = 0; i < s.TupleCount(); i += 7) {
    for (size_t j = 0; j < s.TupleCount(); j += 11) {
      const std::string ca = cap.CaptionFor(s.TupleAt(i)), cb = cap.CaptionFor(s.TupleAt(j));
      const std::string ab = Reformulate(ca, cb, oracle), ba = Reformulate(cb, ca, oracle);
      EXPECT_LE(WordCount(ab), 12u);
      if (i != j) EXPECT_NE(ab, ba);
    }
  }
}

TEST(OracleReformulation, DistinctTargetsGiveDistinctTextsWithinCap) {
  // For a fixed reference, targets differing in at most two attributes map
  // to distinct reformulations.
  const AttributeSchema s = AttributeSchema::Default();
  OracleCaptionBackend cap(s);
  OracleReformulationBackend oracle(s);
  const std::string ref = cap.CaptionFor(s.TupleAt(0));
  std::set<std::string> texts;
  size_t n = 0;
  for (size_t j = 0; j < s.TupleCount(); ++j) {
    if (AttributeDistance(s.TupleAt(0), s.TupleAt(j)) > 2) continue;
    texts.insert(Reformulate(ref, cap.CaptionFor(s.TupleAt(j)), oracle));
    ++n;
  }
  EXPECT_EQ(texts.size(), n);
}

class FixedReformulation : public ReformulationBackend {
 public:
  explicit FixedReformulation(std::string text) : text_(std::move(text)) {}
  std::string id() const override { return "fixed"; }
  bool is_oracle() const override { return false; }
  std::string Describe(std::string_view, std::string_view) override { return text_; }

 private:
  std::string text_;
};

class FixedCaption : public CaptionBackend {
 public:
  explicit FixedCaption(std::string text) : text_(std::move(text)) {}
  std::string id() const override { return "fixed"; }
  std::string Describe(const ImageRecord&) override { return text_; }

 private:
  std::string text_;
};

TEST(Reformulate, TruncatesExternalOutputAtWordBoundary) {
  FixedReformulation backend("one two three four five six seven eight nine ten eleven twelve thirteen fourteen");
  EXPECT_EQ(Reformulate("a", "b", backend), "one two three four five six seven eight nine ten eleven twelve");
  EXPECT_EQ(Reformulate("a", "b", backend, 3), "one two three");
}

TEST(Reformulate, BlankOutputAndBlankInput) {
  FixedReformulation blank("  \n ");
  EXPECT_EQ(CodeOf([&] { Reformulate("a", "b", blank); }), ErrorCode::kEmptyReformulation);
  FixedReformulation ok("x");
  EXPECT_EQ(CodeOf([&] { Reformulate("", "b", ok); }), ErrorCode::kEmptyCaption);
}

TEST(Caption, BlankOutputIsEmptyCaption) {
  FixedCaption blank(" ");
  EXPECT_EQ(CodeOf([&] { Caption(Record("a"), blank); }), ErrorCode::kEmptyCaption);
  FixedCaption padded("  a red dress \n");
  EXPECT_EQ(Caption(Record("a"), padded).text, "a red dress");
}

// ---- datasets ----

struct World {
  Collection collection;
  OracleCaptionBackend caption;
  OracleReformulationBackend reform;
  World() : collection(GenerateWorld({})), caption(AttributeSchema::Default()), reform(AttributeSchema::Default()) {}
};

TEST(Dataset, OneTripletPerPairWithMatchingCaptions) {
  SyntheticWorldConfig wc;
  wc.n_images = 2;
  wc.seed = 4;
  const Collection c = GenerateWorld(wc);
  OracleCaptionBackend cap(wc.schema);
  OracleReformulationBackend ref(wc.schema);
  const TripletDataset ds = BuildDataset(c, {PairStrategy::kGlobalRandom, 1, 0, true}, cap, ref);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].caption_ref, Caption(c.at(ds[0].ref_id), cap).text);
  EXPECT_EQ(ds[0].caption_target, Caption(c.at(ds[0].target_id), cap).text);
  EXPECT_EQ(ds[0].reformulation, Reformulate(ds[0].caption_ref, ds[0].caption_target, ref));
  EXPECT_EQ(ds[0].backend_ids, std::make_pair(cap.id(), ref.id()));
  EXPECT_EQ(ds[0].pair_index, 0);
}

TEST(Dataset, ZeroPairsIsConfigError) {
  World w;
  EXPECT_EQ(CodeOf([&] { BuildDataset(w.collection, {PairStrategy::kSameMetaClass, 0, 0, true}, w.caption, w.reform); }),
            ErrorCode::kInvalidConfig);
}

TEST(Dataset, SameSeedGivesIdenticalBytes) {
  World w;
  PairSamplingConfig cfg{PairStrategy::kSameMetaClass, 300, 3, true};
  testing::TempDir dir("dataset");
  WriteDataset(dir.path() / "a.jsonl", BuildDataset(w.collection, cfg, w.caption, w.reform), {});
  BuildOptions parallel;
  parallel.workers = 4;
  WriteDataset(dir.path() / "b.jsonl", BuildDataset(w.collection, cfg, w.caption, w.reform, parallel), {});
  EXPECT_EQ(ReadFile(dir.path() / "a.jsonl"), ReadFile(dir.path() / "b.jsonl"));
  EXPECT_EQ(Sha256File(dir.path() / "a.jsonl"), Sha256File(dir.path() / "b.jsonl"));
}

TEST(Dataset, SerializationRoundTripAndKeyOrder) {
  World w;
  TripletDataset ds = BuildDataset(w.collection, {PairStrategy::kSameMetaClass, 20, 1, true}, w.caption, w.reform);
  ds[3].subset = std::vector<std::string>{"x", "y"};
  const std::string text = SerializeDataset(ds);
  EXPECT_EQ(ParseDataset(text), ds);
  const std::string first = text.substr(0, text.find('\n'));
  const std::vector<std::string> keys = {"ref_id",         "target_id",   "reformulation", "caption_ref",
                                         "caption_target", "backend_ids", "pair_index"};
  size_t pos = 0;
  for (const std::string& k : keys) {
    const size_t at = first.find("\"" + k + "\"");
    ASSERT_NE(at, std::string::npos) << k;
    EXPECT_GE(at, pos);
    pos = at;
  }
  EXPECT_THROW(ParseDataset("{not json}\n"), Error);
}

TEST(Dataset, ManifestRecordsContentHash) {
  World w;
  const TripletDataset ds =
      BuildDataset(w.collection, {PairStrategy::kSameMetaClass, 10, 1, true}, w.caption, w.reform);
  testing::TempDir dir("manifest");
  const auto path = dir.path() / "d.jsonl";
  WriteDataset(path, ds, {{"seed", 1}});
  const auto manifest = nlohmann::json::parse(ReadFile(ManifestPath(path)));
  EXPECT_EQ(manifest.at("content_sha256"), Sha256File(path));
  EXPECT_EQ(manifest.at("n_records"), 10);
  EXPECT_EQ(manifest.at("schema_version"), kDatasetSchemaVersion);
  EXPECT_EQ(ReadDataset(path), ds);
}

TEST(Dataset, ValidationCatchesDanglingIdsAndLongTexts) {
  World w;
  TripletDataset ds = BuildDataset(w.collection, {PairStrategy::kSameMetaClass, 5, 1, true}, w.caption, w.reform);
  EXPECT_NO_THROW(ValidateDataset(ds, w.collection));
  TripletDataset bad = ds;
  bad[0].target_id = "missing";
  EXPECT_EQ(CodeOf([&] { ValidateDataset(bad, w.collection); }), ErrorCode::kDanglingId);
  bad = ds;
  bad[0].reformulation = "w w w w w w w w w w w w w";
  EXPECT_THROW(ValidateDataset(bad, w.collection), Error);
}

TEST(EvalSet, CasesRespectSplitsSubsetsAndExclusions) {
  World w;
  const TripletDataset train =
      BuildDataset(w.collection, {PairStrategy::kSameMetaClass, 2000, 0, true}, w.caption, w.reform);
  std::set<ImagePair> used;
  for (const Triplet& t : train) used.insert({t.ref_id, t.target_id});
  EvalSetOptions opts;
  opts.n_cases = 200;
  const TripletDataset cases = BuildEvalSet(w.collection, train, w.caption, w.reform, opts);
  ASSERT_EQ(cases.size(), 200u);
  std::set<ImagePair> seen;
  for (const Triplet& c : cases) {
    EXPECT_EQ(w.collection.at(c.ref_id).split, Split::kQuery);
    EXPECT_EQ(w.collection.at(c.target_id).split, Split::kIndex);
    EXPECT_EQ(w.collection.at(c.ref_id).meta_class, w.collection.at(c.target_id).meta_class);
    EXPECT_EQ(used.count({c.ref_id, c.target_id}), 0u);
    EXPECT_TRUE(seen.insert({c.ref_id, c.target_id}).second);
    ASSERT_TRUE(c.subset.has_value());
    EXPECT_EQ(c.subset->size(), 6u);
    EXPECT_NE(std::find(c.subset->begin(), c.subset->end(), c.target_id), c.subset->end());
    EXPECT_EQ(std::find(c.subset->begin(), c.subset->end(), c.ref_id), c.subset->end());
    for (const std::string& id : *c.subset) EXPECT_EQ(w.collection.at(id).split, Split::kIndex);
  }
  EXPECT_EQ(BuildEvalSet(w.collection, train, w.caption, w.reform, opts), cases);
}

}  // namespace
}  // namespace zscir
