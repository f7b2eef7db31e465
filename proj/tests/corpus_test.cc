#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "relcnn/corpus.h"
#include "test_util.h"

using namespace relcnn;

namespace {

const char* kRecord =
    R"({"id":"a","tokens":[{"text":"pain","pos":"NN","chunk":"B-NP"},)"
    R"({"text":"after","pos":"IN","chunk":"O"},)"
    R"({"text":"surgery","pos":"NN","chunk":"B-NP"}],)"
    R"("entities":[{"start":0,"end":0,"type":"problem"},)"
    R"({"start":2,"end":2,"type":"treatment"}],)"
    R"("relations":[{"arg1":1,"arg2":0,"label":"TrCP"}]})";

ParseErrorKind parse_kind(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_corpus(in);
  } catch (const CorpusParseError& e) {
    return e.kind();
  }
  FAIL("no parse error for: " << text);
  return ParseErrorKind::kMalformedRecord;
}

std::string replace(std::string s, const std::string& from,
                    const std::string& to) {
  auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("labels map to dense class ids") {
  CHECK(label_id(RelationLabel::kTeCP) == 0);
  CHECK(label_id(RelationLabel::kTeRP) == 4);
  CHECK(label_id(RelationLabel::kNoRelation) == kNoRelationId);
  CHECK_THROWS_AS(label_id(RelationLabel::kTrNAP), std::invalid_argument);
  CHECK_THROWS_AS(label_from_id(6), std::out_of_range);
  for (int c = 0; c < kNumClasses; ++c)
    CHECK(label_id(label_from_id(c)) == c);
  CHECK(parse_label("TrWP") == RelationLabel::kTrWP);
  CHECK_FALSE(parse_label("trwp").has_value());
  CHECK(label_name(RelationLabel::kNoRelation) == "None");
}

TEST_CASE("parse a well formed record") {
  std::istringstream in(std::string(kRecord) + "\n\n");
  Corpus c = parse_corpus(in);
  REQUIRE(c.sentences.size() == 1);
  const Sentence& s = c.sentences[0];
  CHECK(s.size() == 3);
  CHECK(s.tokens[1].pos_tag == "IN");
  CHECK(s.entities[1].etype == EntityType::kTreatment);
  CHECK(s.relations[0].label == RelationLabel::kTrCP);
  CHECK(c.find("a") == &s);
  CHECK(c.find("b") == nullptr);
}

TEST_CASE("parse errors name their kind") {
  std::string r = kRecord;
  CHECK(parse_kind("{not json") == ParseErrorKind::kMalformedRecord);
  CHECK(parse_kind(replace(r, R"("id":"a",)", "")) ==
        ParseErrorKind::kMalformedRecord);
  CHECK(parse_kind(replace(r, R"("end":2)", R"("end":3)")) ==
        ParseErrorKind::kSpanOutOfRange);
  std::string swapped = replace(r, R"("start":0,"end":0,"type":"problem")",
                                R"("start":9,"end":9,"type":"problem")");
  swapped = replace(swapped, R"("start":2,"end":2)", R"("start":0,"end":0)");
  swapped = replace(swapped, R"("start":9,"end":9)", R"("start":2,"end":2)");
  CHECK(parse_kind(swapped) == ParseErrorKind::kEntityOrder);
  CHECK(parse_kind(replace(r, R"("start":0,"end":0)", R"("start":0,"end":2)")) ==
        ParseErrorKind::kOverlappingEntities);
  CHECK(parse_kind(r + "\n" + r) == ParseErrorKind::kDuplicateSentenceId);
  CHECK(parse_kind(replace(r, "\"problem\"", "\"disease\"")) ==
        ParseErrorKind::kUnknownEntityType);
  CHECK(parse_kind(replace(r, "\"TrCP\"", "\"Causes\"")) ==
        ParseErrorKind::kUnknownLabel);
  CHECK(parse_kind(replace(r, "\"TrCP\"", "\"None\"")) ==
        ParseErrorKind::kUnknownLabel);
  CHECK(parse_kind(replace(r, R"("arg1":1)", R"("arg1":0)")) ==
        ParseErrorKind::kInvalidRelation);
  CHECK(parse_kind(replace(r, R"("arg1":1)", R"("arg1":5)")) ==
        ParseErrorKind::kInvalidRelation);
}

TEST_CASE("parse error reports the line") {
  std::istringstream in(std::string(kRecord) + "\n\n{bad");
  try {
    parse_corpus(in);
    FAIL("expected error");
  } catch (const CorpusParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("canonical serialization round trips") {
  Corpus c;
  c.sentences = {testing::lexix_sentence(), testing::gcsf_sentence()};
  std::ostringstream out;
  write_corpus(c, out);
  std::istringstream in(out.str());
  Corpus back = parse_corpus(in);
  REQUIRE(back.sentences.size() == 2);
  std::ostringstream again;
  write_corpus(back, again);
  CHECK(again.str() == out.str());
  CHECK(serialize_sentence(back.sentences[1]) ==
        serialize_sentence(c.sentences[1]));
  CHECK(out.str().rfind(R"({"id":"s1","tokens":[{"text":"He")", 0) == 0);
}

TEST_CASE("load_corpus reports missing files") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), std::runtime_error);
}

TEST_CASE("instances of the G-CSF sentence") {
  Sentence s = testing::gcsf_sentence();
  auto inst = generate_instances(s, s.relations);
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].arg1 == 0);
  CHECK(inst[0].arg2 == 1);
  CHECK(inst[0].label == RelationLabel::kTeRP);
  CHECK(inst[1].arg1 == 0);
  CHECK(inst[1].arg2 == 2);
  CHECK(inst[1].label == RelationLabel::kNoRelation);
  CHECK(inst[0].id() == "s2:0-1");
}

TEST_CASE("instance generation edge cases") {
  Sentence one = testing::make_sentence("x", "fever today", {{0, 0}});
  CHECK(generate_instances(one, {}).empty());

  Sentence four = testing::make_sentence(
      "y", "a b c d", {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  auto inst = generate_instances(four, {});
  CHECK(inst.size() == 6);
  for (const auto& i : inst) {
    CHECK(i.arg1 < i.arg2);
    CHECK(i.label == RelationLabel::kNoRelation);
  }

  std::vector<RelationInstance> mixed = {
      {"a", 0, 1, RelationLabel::kTrWP}, {"a", 0, 2, RelationLabel::kPIP},
      {"a", 1, 2, RelationLabel::kTrIP}};
  auto kept = filter_classes(mixed);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].label == RelationLabel::kPIP);
}

TEST_CASE("stratified folds") {
  std::vector<RelationInstance> inst;
  for (int i = 0; i < 103; ++i) {
    auto label = label_from_id(i % 7 == 0 ? 0 : (i % 3 == 0 ? 2 : 5));
    inst.push_back({"s" + std::to_string(i), 0, 1, label});
  }
  FoldSplit split = split_folds(inst, 5, 11);
  CHECK(split.k == 5);
  REQUIRE(split.assignments.size() == inst.size());

  std::vector<int> seen(inst.size(), 0);
  std::size_t smallest = inst.size(), largest = 0;
  for (int f = 0; f < 5; ++f) {
    auto test = split.test_indices(f);
    auto train = split.train_indices(f);
    CHECK(test.size() + train.size() == inst.size());
    for (auto i : test) ++seen[i];
    smallest = std::min(smallest, test.size());
    largest = std::max(largest, test.size());

    std::map<RelationLabel, int> per_label;
    for (auto i : test) ++per_label[inst[i].label];
    for (auto label : {RelationLabel::kTeCP, RelationLabel::kPIP,
                       RelationLabel::kNoRelation}) {
      long total = std::count_if(inst.begin(), inst.end(), [&](const auto& x) {
        return x.label == label;
      });
      CHECK(std::abs(per_label[label] - total / 5.0) <= 1.0);
    }
  }
  for (int s : seen) CHECK(s == 1);
  CHECK(largest - smallest <= 1);

  CHECK(split_folds(inst, 5, 11).assignments == split.assignments);
  CHECK(split_folds(inst, 5, 12).assignments != split.assignments);
  CHECK_THROWS(split_folds(inst, 1, 1));
  CHECK_THROWS(split_folds(std::span(inst).first(3), 4, 1));
}
