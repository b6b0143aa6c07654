#include "doctest.h"
#include "helpers.hpp"

using namespace qt;

namespace {
Mat basis2(double a, double b, double c, double d) {
  Mat B(2, 2);
  B << a, c, b, d;  // columns (a, b), (c, d)
  return B;
}
}  // namespace

TEST_CASE("canonical_grouping examples") {
  Grouping g = canonical_grouping({1, 2, 3}, 10);
  CHECK(g.groups.size() == 1);
  CHECK(g.scales[0] == doctest::Approx(6));
  g = canonical_grouping({1, 100}, 10);
  REQUIRE(g.groups.size() == 2);
  CHECK(g.scales[0] == doctest::Approx(2));
  CHECK(g.scales[1] == doctest::Approx(200));
  g = canonical_grouping({5}, 10);
  CHECK(g.groups.size() == 1);
  CHECK(g.scales[0] == doctest::Approx(10));
  CHECK_THROWS_AS(canonical_grouping({}, 10), InputError);
}

TEST_CASE("short_basis examples") {
  ShortBasis sb = short_basis(basis2(1, 0, 0, 3), StratParams::with_l(2, 800));
  CHECK(sb.s() == 1);
  CHECK(sb.norms[0] == doctest::Approx(1));
  CHECK(sb.norms[1] == doctest::Approx(3));
  CHECK(sb.grouping.scales[0] == doctest::Approx(6));

  sb = short_basis(basis2(1, 0, 0, 1e4), StratParams::with_l(2, 800));
  REQUIRE(sb.s() == 2);
  CHECK(sb.grouping.groups[0] == std::vector<int>{0});
  CHECK(sb.grouping.groups[1] == std::vector<int>{1});
  CHECK(sb.grouping.scales[0] == doctest::Approx(2));
  CHECK(sb.grouping.scales[1] == doctest::Approx(20000));

  sb = short_basis(basis2(1, 0, 0.5, 1e4), StratParams::for_dimension(2));
  CHECK(sb.vectors(0, 0) == doctest::Approx(1));
  CHECK(sb.vectors(0, 1) == doctest::Approx(0.5));
  CHECK(sb.vectors(1, 1) == doctest::Approx(1e4));
}

TEST_CASE("short_basis rejects degenerate input") {
  CHECK_THROWS_AS(short_basis(basis2(1, 0, 2, 0), StratParams::for_dimension(2)), InputError);
}

TEST_CASE("default c_n is (n+1)!") {
  CHECK(StratParams::for_dimension(2).c_n == 6);
  CHECK(StratParams::for_dimension(3).c_n == 24);
  CHECK(StratParams::for_dimension(2).l == doctest::Approx(2400));
}

TEST_CASE("scale_properties_check examples") {
  const Mat B = basis2(1, 0, 0, 1e4);
  const auto sp = make_flat_torus(B);
  const ShortBasis sb = short_basis(B, StratParams::with_l(2, 800));
  CHECK(scale_properties_check(*sp, sb, Vec::Zero(2)).pass);
  CHECK(scale_properties_check(*sp, sb, v2(0.3, 7.1)).pass);
  const Mat B2 = basis2(1, 0, 0, 2);
  const ShortBasis sb2 = short_basis(B2, StratParams::for_dimension(2));
  CHECK(sb2.s() == 1);
  CHECK(scale_properties_check(*make_flat_torus(B2), sb2, Vec::Zero(2)).pass);
}

TEST_CASE("diameter_bound examples") {
  struct Case {
    Mat B;
    double emp, ana;
  };
  Mat one = Mat::Constant(1, 1, 1.0);
  for (const auto& c : {Case{basis2(1, 0, 0, 1), std::sqrt(0.5), 12}, Case{one, 0.5, 6}, Case{basis2(1, 0, 0, 3), std::sqrt(2.5), 36}}) {
    const auto sp = make_flat_torus(c.B);
    const DiameterBound db = diameter_bound(*sp, short_basis(c.B, StratParams::for_dimension(static_cast<int>(c.B.rows()))));
    CHECK(db.pass);
    CHECK(db.analytic == doctest::Approx(c.ana));
    CHECK(db.empirical == doctest::Approx(c.emp).epsilon(1e-9));
  }
}

TEST_CASE("short basis is presentation independent") {
  const Mat B = basis2(1, 0.2, 0.3, 2.5);
  Mat U(2, 2);
  U << 2, 1, 1, 1;  // unimodular
  const auto a = short_basis(B, StratParams::for_dimension(2));
  const auto b = short_basis(B * U, StratParams::for_dimension(2));
  for (int i = 0; i < 2; ++i) CHECK(a.norms[static_cast<std::size_t>(i)] == doctest::Approx(b.norms[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("grouping scales with the lattice") {
  const Mat B = basis2(1, 0, 0, 1e4);
  const auto a = short_basis(B, StratParams::with_l(2, 800));
  const auto b = short_basis(3.5 * B, StratParams::with_l(2, 800));
  CHECK(a.grouping.groups == b.grouping.groups);
  for (std::size_t k = 0; k < a.grouping.scales.size(); ++k)
    CHECK(b.grouping.scales[k] == doctest::Approx(3.5 * a.grouping.scales[k]));
}

TEST_CASE("local group at l_k/8 recovers Lambda_k") {
  const Mat B = basis2(1, 0, 0, 1e4);
  const auto sp = make_flat_torus(B);
  const auto sb = short_basis(B, StratParams::with_l(2, 800));
  for (int k = 0; k < sb.s(); ++k) {
    std::vector<int> idx;
    for (int j = 0; j <= k; ++j)
      for (int i : sb.grouping.groups[static_cast<std::size_t>(j)]) idx.push_back(i);
    Mat Bk(2, static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) Bk.col(static_cast<int>(i)) = sb.vectors.col(idx[i]);
    for (const Vec& p : {Vec(Vec::Zero(2)), v2(0.3, 7.1)}) {
      const LocalGroup lg = local_group(*sp, p, sb.grouping.scales[static_cast<std::size_t>(k)] / 8.0);
      for (const auto& g : lg.generating_ball.elements) CHECK(in_integer_span(Bk, g.translation()));
      for (int i = 0; i < Bk.cols(); ++i) {
        bool found = false;
        for (const auto& g : lg.generating_ball.elements) found = found || (g.translation() - Bk.col(i)).norm() < 1e-9;
        CHECK(found);
      }
    }
  }
}
