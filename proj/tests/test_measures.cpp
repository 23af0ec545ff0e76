#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "jointvip/error.hpp"
#include "jointvip/measures.hpp"
#include "oracle.hpp"
#include "random_study.hpp"

using namespace jointvip;

namespace {

RoleSpec roles_for(const fixture::RawStudy& st) {
  RoleSpec r;
  r.treatment = "treat";
  r.outcome = "y";
  r.covariates = st.names;
  return r;
}

ValidatedStudy load(const fixture::RawStudy& st) {
  return load_study(fixture::to_csv(st, st.pilot), fixture::to_csv(st, st.analysis), roles_for(st),
                    {})
      .study;
}

// One covariate x. Treated x = {2, 4}, analysis controls x = {1, 3},
// pilot x = {0, 1, 2} with outcome {0, 2, 1}.
ValidatedStudy hand_study() {
  RoleSpec r;
  r.treatment = "t";
  r.outcome = "y";
  r.covariates = {"x"};
  return load_study("t,y,x\n0,0,0\n0,2,1\n0,1,2\n", "t,y,x\n1,0,2\n1,0,4\n0,0,1\n0,0,3\n", r, {})
      .study;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a jointvip::Error");
  return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("sample_sd") {
  const std::vector<double> a{0, 1, 2};
  CHECK(sample_sd(a) == 1.0);
  const std::vector<double> b{5, 5, 5};
  CHECK(sample_sd(b) == 0.0);
  const std::vector<double> one{1};
  CHECK(code_of([&] { sample_sd(one); }) == ErrorCode::TooFewValues);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(3.0, 2.0);
  std::vector<double> v(40);
  for (auto& x : v) x = nd(rng);
  long double m = 0.0L;
  for (double x : v) m += x;
  m /= v.size();
  long double ss = 0.0L;
  for (double x : v) ss += (x - m) * (x - m);
  const double want = static_cast<double>(std::sqrt(ss / (v.size() - 1)));
  CHECK(std::fabs(sample_sd(v) - want) <= 1e-12 * want);
}

TEST_CASE("pearson") {
  const std::vector<double> x{0, 1, 2}, y{0, 2, 1};
  CHECK(pearson(x, y) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pearson(x, x) == 1.0);
  const std::vector<double> flat{1, 1, 1};
  CHECK(code_of([&] { pearson(x, flat); }) == ErrorCode::ZeroVariance);
  const std::vector<double> two{1, 2};
  CHECK(code_of([&] { pearson(two, two); }) == ErrorCode::TooFewValues);

  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> a(50), b(50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = nd(rng);
    b[i] = 0.3 * a[i] + nd(rng);
  }
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  const double want = static_cast<double>(sab / std::sqrt(saa * sbb));
  CHECK(std::fabs(pearson(a, b) - want) <= 1e-12);
}

TEST_CASE("smd flavors on a hand-computed study") {
  const auto s = hand_study();
  CHECK(smd(s, "x", SmdFlavor::pure) == 1.0);
  CHECK(smd(s, "x", SmdFlavor::cross_sample) == 2.0);
  CHECK(code_of([&] { smd(s, "nope", SmdFlavor::pure); }) == ErrorCode::UnknownCovariate);
  CHECK(outcome_correlation(s.pilot, "x") == doctest::Approx(0.5).epsilon(1e-15));

  const auto m = create_jointvip(s);
  REQUIRE(m.measures.size() == 1);
  const auto& x = m.measures[0];
  CHECK(x.pilot_mean == 1.0);
  CHECK(x.pilot_sd == 1.0);
  CHECK(x.analysis_treated_mean == 3.0);
  CHECK(x.analysis_control_mean == 2.0);
  CHECK(x.bias_pure == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(x.bias_cross == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.n_pilot == 3);
  CHECK(m.n_treated == 2);
  CHECK(m.n_control == 2);
}

TEST_CASE("bias_score") {
  CHECK(bias_score(2.0, 0.5) == 1.0);
  CHECK(bias_score(123.0, 0.0) == 0.0);
}

TEST_CASE("identical arms give zero pure SMD") {
  RoleSpec r;
  r.treatment = "t";
  r.outcome = "y";
  r.covariates = {"a", "b"};
  const std::string pilot = "t,y,a,b\n0,1,3,0\n0,2,5,1\n0,4,4,1\n0,3,9,0\n";
  // Analysis: the pilot rows plus treated clones of them.
  const std::string analysis =
      "t,y,a,b\n0,1,3,0\n0,2,5,1\n0,4,4,1\n0,3,9,0\n1,1,3,0\n1,2,5,1\n1,4,4,1\n1,3,9,0\n";
  const auto m = create_jointvip(load_study(pilot, analysis, r, {}).study);
  for (const auto& x : m.measures) {
    CHECK(x.smd_pure == 0.0);
    CHECK(x.smd_cross == 0.0);
  }
}

TEST_CASE("degenerate pilot outcome is an error at model creation") {
  RoleSpec r;
  r.treatment = "t";
  r.outcome = "y";
  r.covariates = {"x"};
  const auto s = load_study("t,y,x\n0,1,0\n0,1,1\n0,1,2\n", "t,y,x\n1,0,2\n0,0,1\n", r, {}).study;
  try {
    create_jointvip(s);
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVariance);
    CHECK(e.detail().at("column") == "y");
  }
  const auto two = load_study("t,y,x\n0,1,0\n0,2,1\n", "t,y,x\n1,0,2\n0,0,1\n", r, {}).study;
  CHECK(code_of([&] { create_jointvip(two); }) == ErrorCode::TooFewValues);
}

TEST_CASE("summarize and tabulate") {
  JointVipModel m;
  auto add = [&](std::string name, double bias) {
    CovariateMeasure c;
    c.name = std::move(name);
    c.smd_cross = c.smd_pure = bias * 2;
    c.outcome_cor = 0.5;
    c.bias_cross = c.bias_pure = bias;
    m.measures.push_back(c);
  };
  add("zeta", 0.02);
  add("alpha", -0.02);
  add("mid", 0.05);
  add("tiny", 0.001);
  add("edge", 0.01);  // equal to the tolerance: not above it

  ReportOptions opts;
  const auto s = summarize(m, opts);
  CHECK(s.max_abs_bias == 0.05);
  CHECK(s.n_above_tol == 3);
  CHECK(s.n_plottable == 5);

  const auto rows = tabulate(m, opts);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].name == "mid");
  CHECK(rows[1].name == "alpha");  // tie on |bias| broken by name
  CHECK(rows[2].name == "zeta");
  CHECK(rows[1].bias == 0.02);

  opts.use_abs = false;
  CHECK(tabulate(m, opts)[1].bias == -0.02);

  opts.bias_tol = 0.06;
  CHECK(summarize(m, opts).n_above_tol == 0);
  CHECK(tabulate(m, opts).empty());

  opts.bias_tol = 0.0;
  CHECK(code_of([&] { summarize(m, opts); }) == ErrorCode::InvalidOptions);
  opts.bias_tol = std::nan("");
  CHECK(code_of([&] { tabulate(m, opts); }) == ErrorCode::InvalidOptions);

  for (auto& c : m.measures) c.outcome_cor = c.bias_cross = c.bias_pure = 0.0;
  CHECK(summarize(m, ReportOptions{}).max_abs_bias == 0.0);
}

TEST_CASE("duplicate covariate columns tie and order by name") {
  RoleSpec r;
  r.treatment = "t";
  r.outcome = "y";
  r.covariates = {"zz", "aa", "mm"};
  // aa and zz carry identical values, so their measures are identical.
  const std::string pilot = "t,y,zz,aa,mm\n0,1,0,0,5\n0,3,1,1,2\n0,2,3,3,4\n0,5,2,2,1\n";
  const std::string analysis = "t,y,zz,aa,mm\n1,0,9,9,1\n1,0,7,7,2\n0,0,1,1,3\n0,0,2,2,4\n";
  const auto m = create_jointvip(load_study(pilot, analysis, r, {}).study);
  CHECK(m.measures[0].bias_cross == m.measures[1].bias_cross);
  ReportOptions opts;
  opts.bias_tol = 1e-6;
  const auto rows = tabulate(m, opts);
  std::vector<std::string> names;
  for (const auto& row : rows) names.push_back(row.name);
  const auto aa = std::find(names.begin(), names.end(), "aa");
  const auto zz = std::find(names.begin(), names.end(), "zz");
  REQUIRE(aa != names.end());
  REQUIRE(zz != names.end());
  CHECK(zz - aa == 1);
}

TEST_CASE("random studies match the brute-force oracle") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 300; ++k) {
    const auto st = fixture::random_study(rng);
    const auto model = create_jointvip(load(st));
    REQUIRE(model.measures.size() == st.names.size());
    for (std::size_t j = 0; j < st.names.size(); ++j) {
      const auto o = oracle::measure(st, j);
      const auto& m = model.measures[j];
      CHECK(m.name == st.names[j]);
      CHECK(oracle::close(m.pilot_mean, o.pilot_mean, 1e-12, o.mean_scale));
      CHECK(oracle::close(m.pilot_sd, o.pilot_sd, 1e-12));
      CHECK(oracle::close(m.analysis_treated_mean, o.treated_mean, 1e-12, o.mean_scale));
      CHECK(oracle::close(m.analysis_control_mean, o.control_mean, 1e-12, o.mean_scale));
      CHECK(oracle::close(m.smd_pure, o.smd_pure, 1e-12, o.smd_scale));
      CHECK(oracle::close(m.smd_cross, o.smd_cross, 1e-12, o.smd_scale));
      CHECK(oracle::close(m.outcome_cor, o.cor, 1e-12, 1.0));
      CHECK(oracle::close(m.bias_pure, o.bias_pure, 1e-12, o.bias_scale));
      CHECK(oracle::close(m.bias_cross, o.bias_cross, 1e-12, o.bias_scale));
      CHECK(std::fabs(m.bias_pure) <= std::fabs(m.smd_pure));
      CHECK(std::fabs(m.bias_cross) <= std::fabs(m.smd_cross));
      CHECK(std::fabs(m.outcome_cor) <= 1.0);
    }
    ReportOptions opts;
    CHECK(summarize(model, opts).n_above_tol == tabulate(model, opts).size());
  }
}

TEST_CASE("row permutation changes no measure beyond rounding") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 50; ++k) {
    auto st = fixture::random_study(rng);
    const auto a = create_jointvip(load(st));
    std::shuffle(st.pilot.begin(), st.pilot.end(), rng);
    std::shuffle(st.analysis.begin(), st.analysis.end(), rng);
    const auto b = create_jointvip(load(st));
    for (std::size_t j = 0; j < a.measures.size(); ++j) {
      const auto o = oracle::measure(st, j);
      CHECK(oracle::close(a.measures[j].smd_cross, b.measures[j].smd_cross, 1e-12, o.smd_scale));
      CHECK(oracle::close(a.measures[j].outcome_cor, b.measures[j].outcome_cor, 1e-12, 1.0));
    }
  }
}

TEST_CASE("negating a covariate negates smd, cor and keeps bias") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    auto st = fixture::random_study(rng);
    const auto a = create_jointvip(load(st));
    for (auto* rows : {&st.pilot, &st.analysis}) {
      for (auto& r : *rows) r.x[0] = -r.x[0];
    }
    const auto b = create_jointvip(load(st));
    CHECK(b.measures[0].smd_pure == -a.measures[0].smd_pure);
    CHECK(b.measures[0].smd_cross == -a.measures[0].smd_cross);
    CHECK(b.measures[0].outcome_cor == doctest::Approx(-a.measures[0].outcome_cor).epsilon(1e-12));
    CHECK(std::fabs(b.measures[0].bias_cross) ==
          doctest::Approx(std::fabs(a.measures[0].bias_cross)).epsilon(1e-12));
  }
}

TEST_CASE("smd flavor names") {
  CHECK(to_string(SmdFlavor::cross_sample) == "cross-sample");
  CHECK(parse_smd_flavor("pure") == SmdFlavor::pure);
  CHECK(parse_smd_flavor("cross-sample") == SmdFlavor::cross_sample);
  CHECK(code_of([] { parse_smd_flavor("standard"); }) == ErrorCode::InvalidOptions);
}
