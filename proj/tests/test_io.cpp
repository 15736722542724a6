#include <gtest/gtest.h>

#include "support.hpp"

using namespace pcmr;
using namespace pcmr::testing;

namespace {

const char* kTable1Csv =
    "n=6\n"
    "1,1/3,8,3,3,7\n"
    "3,1,9,3,3,9\n"
    "1/8,1/9,1,1/6,1/5,2\n"
    "1/3,1/3,6,1,1/3,6\n"
    "1/3,1/3,5,3,1,6\n"
    "1/7,1/9,1/2,1/6,1/6,1\n";

ErrorCode code_of(std::string_view text) {
  try {
    parse_matrix(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ConvergenceFailure;  // marker: nothing thrown
}

}  // namespace

TEST(Parse, Table1Csv) { EXPECT_EQ(parse_matrix(kTable1Csv), table1()); }

TEST(Parse, DenseJsonOfOrderTwoIsTooSmall) {
  EXPECT_EQ(code_of("[[1,2],[0.5,1]]"), ErrorCode::OrderTooSmall);
}

TEST(Parse, UpperJson) {
  const auto a = parse_matrix(R"({"n":3,"upper":[2,4,2]})");
  EXPECT_TRUE(is_consistent(a));
  EXPECT_EQ(a.upper(), (std::vector<double>{2, 4, 2}));
}

TEST(Parse, FractionStringsInJson) {
  const auto a = parse_matrix(R"({"n":3,"upper":["1/2","1/4",0.5]})");
  EXPECT_EQ(a.at({1, 3}), 0.25);
}

TEST(Parse, CsvErrorCarriesCell) {
  try {
    parse_matrix("n=3\n1,2,4\n1/2,1,abc\n1/4,1/2,1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.col(), 3);
  }
}

TEST(Parse, CsvRowLengthMismatch) {
  EXPECT_EQ(code_of("n=3\n1,2\n1/2,1,2\n1/4,1/2,1\n"), ErrorCode::ParseError);
}

TEST(Parse, CsvMissingHeader) { EXPECT_EQ(code_of("1,2,4\n"), ErrorCode::ParseError); }

TEST(Parse, MalformedJson) { EXPECT_EQ(code_of("[[1,2,"), ErrorCode::ParseError); }

TEST(Parse, UpperJsonWrongLength) {
  EXPECT_EQ(code_of(R"({"n":3,"upper":[2,4]})"), ErrorCode::ParseError);
}

TEST(Serialize, JsonRoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = from_log(LogMatrix::from_upper(5, random_log_upper(5, rng, 2.0)));
    EXPECT_EQ(parse_matrix(serialize_matrix(a, MatrixFormat::DenseJson)), a);
    EXPECT_EQ(parse_matrix(serialize_matrix(a, MatrixFormat::UpperJson)), a);
  }
}

TEST(Serialize, CsvRoundTripKeepsFifteenDigits) {
  std::mt19937_64 rng(4);
  const auto a = from_log(LogMatrix::from_upper(5, random_log_upper(5, rng, 2.0)));
  const auto b = parse_matrix(serialize_matrix(a, MatrixFormat::Csv));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(b(i, j) / a(i, j), 1.0, 1e-15);
}

TEST(Serialize, UpperFormListsRowMajor) {
  const auto j = upper_json(table1());
  EXPECT_EQ(j["n"], 6);
  EXPECT_EQ(j["upper"].size(), 15u);
  EXPECT_EQ(j["upper"][1].get<double>(), 8.0);
}
