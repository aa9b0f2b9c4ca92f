#include <sstream>

#include <gtest/gtest.h>

#include "sana/table.hpp"

namespace sana {
namespace {

Example make_example(std::vector<Attribute> attrs, const std::string& text) {
  Example ex;
  ex.table.attributes = std::move(attrs);
  ex.reference = tokenize(text);
  return ex;
}

TEST(Tokenize, SplitsOnWhitespace) {
  EXPECT_EQ(tokenize("Thaila Ayala"), (Tokens{"Thaila", "Ayala"}));
  EXPECT_EQ(tokenize("8 November 1908"), (Tokens{"8", "November", "1908"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("  a\t\tb \n c  "), (Tokens{"a", "b", "c"}));
}

TEST(ParseCorpus, ReadsLinesInOrder) {
  std::istringstream in(
      R"({"table": [{"key": "name", "value": "Ada Lovelace"}], "text": "Ada was here"})"
      "\n\n"
      R"({"table": [{"key": "x", "value": "1"}], "text": "one"})"
      "\n"
      R"({"table": [{"key": "birth date", "value": "10 December 1815"}], "text": "born 1815"})"
      "\n");
  const Corpus c = parse_corpus(in);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].table.attributes[0].value_tokens, (Tokens{"Ada", "Lovelace"}));
  EXPECT_EQ(c[0].reference, (Tokens{"Ada", "was", "here"}));
  EXPECT_EQ(c[1].line, 3u);
  EXPECT_EQ(c[2].table.attributes[0].key, "birth_date");
}

TEST(ParseCorpus, ErrorsNameTheLine) {
  std::istringstream missing_table(R"({"table": [{"key": "a", "value": "b"}], "text": "b"})"
                                   "\n"
                                   R"({"text": "no table"})");
  try {
    parse_corpus(missing_table);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("table"), std::string::npos);
  }
  std::istringstream malformed("{not json");
  EXPECT_THROW(parse_corpus(malformed), ParseError);
  std::istringstream empty_table(R"({"table": [], "text": "x"})");
  EXPECT_THROW(parse_corpus(empty_table), ParseError);
}

TEST(ParseCorpus, RoundTrip) {
  Corpus c{make_example({{"name", {"Thaila", "Ayala"}}, {"born", {"14", "April", "1986"}}}, "Thaila Ayala is an actress ."),
           make_example({{"k", {"v"}}}, "v")};
  c[0].skeleton = Tokens{"Thaila", "Ayala"};
  std::ostringstream out;
  write_corpus(out, c);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_corpus(in), c);
}

TEST(Vocabulary, ReservedIdsAreFixed) {
  Vocabulary v;
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.id(std::string(kPad)), kPadId);
  EXPECT_EQ(v.id(std::string(kUnk)), kUnkId);
  EXPECT_EQ(v.id(std::string(kBos)), kBosId);
  EXPECT_EQ(v.id(std::string(kEos)), kEosId);
  EXPECT_EQ(v.id(std::string(kPlh)), kPlhId);
  EXPECT_EQ(v.id("never-seen"), kUnkId);
}

TEST(Vocabulary, CountsDistinctTokens) {
  const Corpus c{make_example({{"k", {"a", "b"}}}, "a c")};
  const Vocabulary v = build_vocabulary(c, 100);
  EXPECT_EQ(v.size(), 8u);
  for (const auto& t : {"a", "b", "c"}) EXPECT_EQ(v.token(v.id(t)), t);
}

TEST(Vocabulary, TiesGoToFirstOccurrence) {
  const Vocabulary v = vocabulary_from_stream({"a", "b", "a", "b", "b", "a", "a", "b", "a", "b"}, 6);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
}

TEST(Vocabulary, KeepsMostFrequent) {
  const Vocabulary v = vocabulary_from_stream({"x", "y", "y", "z", "z", "z"}, 7);
  EXPECT_TRUE(v.contains("z"));
  EXPECT_TRUE(v.contains("y"));
  EXPECT_FALSE(v.contains("x"));
  EXPECT_EQ(v.size(), 7u);
}

TEST(Linearize, PaperExample) {
  Table t{{{"Name_ID", {"Thaila", "Ayala"}}}};
  const LinearizedTable cells = linearize_table(t);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].token, "Thaila");
  EXPECT_EQ(cells[0].key, "Name_ID");
  EXPECT_EQ(cells[0].fwd_pos, 1);
  EXPECT_EQ(cells[0].bwd_pos, 2);
  EXPECT_EQ(cells[1].token, "Ayala");
  EXPECT_EQ(cells[1].fwd_pos, 2);
  EXPECT_EQ(cells[1].bwd_pos, 1);
  EXPECT_TRUE(cells[2].is_eos());
  EXPECT_EQ(cells[2].fwd_pos, 1);
  EXPECT_EQ(cells[2].bwd_pos, 1);
}

TEST(Linearize, PositionsSumPerAttribute) {
  Table single{{{"K", {"x"}}}};
  const auto one = linearize_table(single);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].fwd_pos, 1);
  EXPECT_EQ(one[0].bwd_pos, 1);

  Table t{{{"a", {"p", "q"}}, {"b", {"r", "s", "u"}}}};
  const auto cells = linearize_table(t);
  ASSERT_EQ(cells.size(), 6u);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(cells[i].fwd_pos + cells[i].bwd_pos, 3);
  for (int i = 2; i < 5; ++i) EXPECT_EQ(cells[i].fwd_pos + cells[i].bwd_pos, 4);
  EXPECT_TRUE(cells.back().is_eos());
}

TEST(StopWords, CaseInsensitive) {
  const StopWordList w = StopWordList::defaults();
  EXPECT_TRUE(w.contains("the"));
  EXPECT_TRUE(w.contains("The"));
  EXPECT_TRUE(w.contains("THE"));
  EXPECT_FALSE(w.contains("London"));
  const StopWordList custom({"She"});
  EXPECT_TRUE(custom.contains("she"));
}

}  // namespace
}  // namespace sana
