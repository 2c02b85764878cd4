#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mirrorkit/data.hpp"
#include "support/oracles.hpp"

using namespace mirrorkit;

TEST(ParseLibsvm, ReadsLabelAndFeatures) {
  auto ds = parse_libsvm("+1 1:0.5 3:-2.0\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].label, Label::positive);
  EXPECT_EQ(ds[0].features, (SparseVector{{1, 0.5}, {3, -2.0}}));
  EXPECT_EQ(ds.feature_dim, 3u);
}

TEST(ParseLibsvm, FeaturelessLine) {
  auto ds = parse_libsvm("-1\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].label, Label::negative);
  EXPECT_TRUE(ds[0].features.empty());
}

TEST(ParseLibsvm, LabelSpellings) {
  auto ds = parse_libsvm("1 1:1\n+1 1:1\n-1 1:1\n0 1:1\n1.0 2:1\n");
  ASSERT_EQ(ds.size(), 5u);
  EXPECT_EQ(ds[0].label, Label::positive);
  EXPECT_EQ(ds[1].label, Label::positive);
  EXPECT_EQ(ds[2].label, Label::negative);
  EXPECT_EQ(ds[3].label, Label::negative);
  EXPECT_EQ(ds[4].label, Label::positive);
}

TEST(ParseLibsvm, CommentsBlankLinesAndCrlf) {
  auto ds = parse_libsvm("# header\r\n\r\n+1 2:1.5 # trailing\r\n-1 1:2\r\n");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].features, (SparseVector{{2, 1.5}}));
  EXPECT_EQ(ds.feature_dim, 2u);
}

TEST(ParseLibsvm, ExplicitZerosAreDropped) {
  auto ds = parse_libsvm("+1 1:0 2:3\n");
  EXPECT_EQ(ds[0].features, (SparseVector{{2, 3.0}}));
}

TEST(ParseLibsvm, ErrorsNameTheLine) {
  auto line_of = [](std::string_view text) -> std::size_t {
    try {
      parse_libsvm(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("+1 1:1\n-1 2:x\n"), 2u);
  EXPECT_EQ(line_of("+1 3:1 2:1\n"), 1u);      // decreasing index
  EXPECT_EQ(line_of("+1 1:1\n\n-1 2:1 2:5\n"), 3u);  // repeated index
  EXPECT_EQ(line_of("+1 0:1\n"), 1u);          // indices are 1-based
  EXPECT_EQ(line_of("abc 1:1\n"), 1u);
  EXPECT_EQ(line_of("+1 1:1\n1:0.5 2:1\n"), 2u);  // unlabeled sample
  EXPECT_EQ(line_of("3 1:1\n"), 1u);           // not a binary label
  EXPECT_EQ(line_of("+1 1 2:1\n"), 1u);
}

TEST(ParseLibsvm, EmptyStreamIsAnError) {
  EXPECT_THROW(parse_libsvm(""), ParseError);
  EXPECT_THROW(parse_libsvm("# only a comment\n\n"), ParseError);
}

TEST(ParseLibsvm, MissingFileReportsPath) {
  try {
    load_libsvm("/nonexistent/file.svm");
    FAIL();
  } catch (const std::system_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/file.svm"), std::string::npos);
  }
}

TEST(ParseLibsvm, RoundTripProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto ds = oracle::random_dataset(seed, 1 + seed % 17, 1 + seed % 40, 0.3);
    auto again = parse_libsvm(to_libsvm(ds), ds.name);
    EXPECT_EQ(again, ds) << "seed " << seed;
  }
}

TEST(ParseLibsvm, SelfDotMatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto ds = parse_libsvm(to_libsvm(oracle::random_dataset(seed, 8, 50, 0.4)));
    for (const auto& s : ds.samples) {
      auto d = oracle::dense(s.features, 50);
      double sum = 0.0;
      for (double v : d) sum += v * v;
      EXPECT_EQ(dot(s.features, s.features), sum);
    }
  }
}

TEST(SparseVector, RejectsInvariantViolations) {
  EXPECT_THROW((SparseVector{{2, 1.0}, {1, 1.0}}), std::invalid_argument);
  EXPECT_THROW((SparseVector{{0, 1.0}}), std::invalid_argument);
  EXPECT_THROW((SparseVector{{1, std::nan("")}}), std::invalid_argument);
}

TEST(SparseVector, DistanceAndDot) {
  SparseVector x{{1, 1.0}, {3, 2.0}};
  SparseVector y{{2, 4.0}, {3, -1.0}};
  EXPECT_DOUBLE_EQ(dot(x, y), -2.0);
  EXPECT_DOUBLE_EQ(squared_distance(x, y), 1.0 + 16.0 + 9.0);
  EXPECT_EQ(squared_distance(x, y), squared_distance(y, x));
  EXPECT_EQ(squared_distance(x, x), 0.0);
}

TEST(NormalizeUnit, ScalesToUnitNorm) {
  Dataset ds{"t", {{SparseVector{{1, 3.0}, {2, 4.0}}, Label::positive}}, 2};
  auto n = normalize_unit(ds);
  EXPECT_NEAR(n[0].features.entries()[0].value, 0.6, 1e-15);
  EXPECT_NEAR(n[0].features.entries()[1].value, 0.8, 1e-15);
  EXPECT_EQ(n[0].label, Label::positive);
}

TEST(NormalizeUnit, FixedPoints) {
  Dataset ds{"t", {{SparseVector{{1, 1.0}}, Label::negative}, {SparseVector{}, Label::positive}}, 1};
  auto n = normalize_unit(ds);
  EXPECT_EQ(n, ds);
}

TEST(NormalizeUnit, Idempotent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto once = normalize_unit(oracle::random_dataset(seed, 10, 30));
    auto twice = normalize_unit(once);
    for (std::size_t i = 0; i < once.size(); ++i) {
      auto a = once[i].features.entries();
      auto b = twice[i].features.entries();
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].index, b[k].index);
        EXPECT_NEAR(a[k].value, b[k].value, 1e-12);
      }
    }
  }
}

TEST(DatasetStats, CountsClasses) {
  auto ds = parse_libsvm("+1 1:1\n-1 2:1\n-1 3:1\n-1\n");
  auto st = dataset_stats(ds);
  EXPECT_EQ(st.samples, 4u);
  EXPECT_EQ(st.feature_dim, 3u);
  EXPECT_EQ(st.positives, 1u);
  EXPECT_EQ(st.negatives, 3u);
  EXPECT_DOUBLE_EQ(st.negative_fraction, 0.75);
}

TEST(DatasetStats, SinglePositive) {
  auto st = dataset_stats(parse_libsvm("+1 1:1\n"));
  EXPECT_EQ(st.positives, 1u);
  EXPECT_EQ(st.negatives, 0u);
  EXPECT_EQ(st.negative_fraction, 0.0);
}
