#include <cmath>

#include "doctest.h"
#include "nandsan/cost_model.hpp"
#include "nandsan/rng.hpp"
#include "nandsan/sanitizer.hpp"

using namespace nandsan;

namespace {

// Independent formula table, written against the published cost rows before
// the module itself. Integer-valued inputs keep double arithmetic exact.
namespace oracle {

double gc_time_po(double m, double n, const CostParams& p) {
  return m * p.t_pgm + n * p.t_rdg + p.t_pow;
}
double gc_time_slc(double m, double n, const CostParams& p) {
  return m * p.t_pgm + n * p.t_sdg + p.t_slcp;
}
double gc_time_ddp(double m, double n, const CostParams& p) {
  return m * p.t_pgm + n * p.t_ddp;
}
double update_time_oneshot(double m, const CostParams& p) {
  return m * p.t_pgm + p.t_oneshot;
}
double update_time_po(double m, const CostParams& p) {
  return m * p.t_pgm + p.t_rdg + p.t_pow;
}
double update_time_slc(double m, const CostParams& p) {
  return m * p.t_pgm + p.t_sdg + p.t_slcp;
}
double update_time_ddp(double m, const CostParams& p) {
  return m * p.t_pgm + p.t_ddp;
}

}  // namespace oracle

CostParams random_integer_params(Rng& rng) {
  CostParams p;
  p.b = 1.0 + static_cast<double>(rng.below(10));
  p.a = 1000.0 * p.b;
  p.t_pgm = 1.0 + static_cast<double>(rng.below(1000));
  p.t_rdg = 1.0 + static_cast<double>(rng.below(1000));
  p.t_sdg = 1.0 + static_cast<double>(rng.below(1000));
  p.t_pow = 1.0 + static_cast<double>(rng.below(1000));
  p.t_slcp = 1.0 + static_cast<double>(rng.below(1000));
  p.t_ddp = 1.0 + static_cast<double>(rng.below(1000));
  p.t_oneshot = 1.0 + static_cast<double>(rng.below(1000));
  return p;
}

const CostParams kSpot{1000, 1, 200, 10, 10, 400, 220, 50, 300};

}  // namespace

TEST_CASE("gc-case spot values") {
  const CostReport po = gc_case(CostScheme::partial_overwrite, 4, 6, kSpot);
  CHECK(po.time == 4 * 200.0 + 6 * 10.0 + 400.0);
  CHECK(*po.time == 1260.0);
  CHECK(po.pgm_count == Bound{6.0, true});
  CHECK(po.erase_count == 0.0);
  CHECK(po.degradation == Bound{6.0, true});

  const CostReport erase = gc_case(CostScheme::block_erase, 4, 6, kSpot);
  CHECK(erase.degradation == Bound{1000.0, false});
  CHECK_FALSE(erase.time.has_value());
  CHECK(erase.time_lower_bound == 4 * 200.0);
  CHECK(erase.erase_count == 1.0);

  const CostReport ddp = gc_case(CostScheme::ddp, 0, 0, kSpot);
  CHECK(*ddp.time == 0.0);
  CHECK(ddp.degradation.value == 0.0);

  const CostReport lin = gc_case(CostScheme::one_shot, 4, 6, kSpot);
  CHECK_FALSE(lin.applicable);
}

TEST_CASE("update-case spot values") {
  const CostReport lin = update_case(CostScheme::one_shot, 4, kSpot);
  CHECK(*lin.time == 4 * 200.0 + 300.0);
  CHECK(*lin.time == 1100.0);
  CHECK(lin.pgm_count == Bound{1.0, false});
  CHECK(lin.degradation == Bound{1.0, false});

  const CostReport po = update_case(CostScheme::partial_overwrite, 4, kSpot);
  CHECK(*po.time == 4 * 200.0 + 10.0 + 400.0);

  for (const CostScheme s : {CostScheme::one_shot, CostScheme::partial_overwrite,
                             CostScheme::slc, CostScheme::ddp}) {
    const CostReport r = update_case(s, 3, kSpot);
    CHECK(r.erase_count == 0.0);
    CHECK(r.degradation == Bound{kSpot.b, false});
  }
  CHECK(update_case(CostScheme::block_erase, 3, kSpot).erase_count == 1.0);
}

TEST_CASE("analytic rows match the independent oracle on random parameters") {
  Rng rng(404);
  for (int set = 0; set < 100; ++set) {
    const CostParams p = random_integer_params(rng);
    const auto m = rng.below(500);
    const auto n = rng.below(500);
    const auto md = static_cast<double>(m);
    const auto nd = static_cast<double>(n);

    CHECK(*gc_case(CostScheme::partial_overwrite, m, n, p).time ==
          oracle::gc_time_po(md, nd, p));
    CHECK(*gc_case(CostScheme::slc, m, n, p).time ==
          oracle::gc_time_slc(md, nd, p));
    CHECK(*gc_case(CostScheme::ddp, m, n, p).time ==
          oracle::gc_time_ddp(md, nd, p));
    CHECK(gc_case(CostScheme::block_erase, m, n, p).degradation.value == p.a);
    for (const CostScheme s :
         {CostScheme::partial_overwrite, CostScheme::slc, CostScheme::ddp}) {
      const CostReport r = gc_case(s, m, n, p);
      CHECK(r.degradation == Bound{p.b * nd, true});
      CHECK(r.pgm_count == Bound{nd, true});
      CHECK(r.erase_count == 0.0);
    }

    CHECK(*update_case(CostScheme::one_shot, m, p).time ==
          oracle::update_time_oneshot(md, p));
    CHECK(*update_case(CostScheme::partial_overwrite, m, p).time ==
          oracle::update_time_po(md, p));
    CHECK(*update_case(CostScheme::slc, m, p).time ==
          oracle::update_time_slc(md, p));
    CHECK(*update_case(CostScheme::ddp, m, p).time ==
          oracle::update_time_ddp(md, p));
  }
}

TEST_CASE("destruction time is linear in the moved-page count") {
  Rng rng(11);
  const CostParams p = random_integer_params(rng);
  for (std::uint64_t m = 0; m < 40; ++m) {
    CHECK(*gc_case(CostScheme::partial_overwrite, m + 1, 9, p).time -
              *gc_case(CostScheme::partial_overwrite, m, 9, p).time ==
          p.t_pgm);
    CHECK(*gc_case(CostScheme::slc, m + 1, 9, p).time -
              *gc_case(CostScheme::slc, m, 9, p).time == p.t_pgm);
    CHECK(*gc_case(CostScheme::ddp, m + 1, 9, p).time -
              *gc_case(CostScheme::ddp, m, 9, p).time == p.t_pgm);
    CHECK(*update_case(CostScheme::one_shot, m + 1, p).time -
              *update_case(CostScheme::one_shot, m, p).time == p.t_pgm);
    CHECK(*update_case(CostScheme::ddp, m + 1, p).time -
              *update_case(CostScheme::ddp, m, p).time == p.t_pgm);
  }
}

TEST_CASE("overwrite-style schemes beat block erase exactly below the ratio") {
  for (const std::uint64_t n : {1ull, 999ull, 1000ull, 1001ull}) {
    const double erase_total =
        gc_case(CostScheme::block_erase, 4, n, kSpot).degradation.value;
    for (const CostScheme s :
         {CostScheme::partial_overwrite, CostScheme::slc, CostScheme::ddp}) {
      const double proposed = gc_case(s, 4, n, kSpot).degradation.value;
      CHECK((proposed < erase_total) == (n < 1000));
    }
  }
}

TEST_CASE("comparison table ordering and content") {
  const std::vector<CostScheme> all = {
      CostScheme::block_erase, CostScheme::one_shot, CostScheme::partial_overwrite,
      CostScheme::slc, CostScheme::ddp};

  SUBCASE("policy-dependent rows sink to the bottom") {
    const auto rows = compare(CostScenario::gc, all, 4, 6, kSpot);
    REQUIRE(rows.size() == 5);
    CHECK(rows.back().scheme == CostScheme::block_erase);
    CHECK_FALSE(rows.back().time.has_value());
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      CHECK((rows[i].time.has_value() || !rows[i].applicable));
  }

  SUBCASE("single scheme gives a single row") {
    const auto rows =
        compare(CostScenario::update, {CostScheme::ddp}, 2, 0, kSpot);
    REQUIRE(rows.size() == 1);
    CHECK(rows.front().scheme == CostScheme::ddp);
  }

  SUBCASE("update comparison ties every non-erase scheme on degradation") {
    const auto rows = compare(CostScenario::update, all, 4, 0, kSpot);
    for (const auto& r : rows) {
      if (r.scheme == CostScheme::block_erase || !r.applicable) continue;
      CHECK(r.degradation == Bound{kSpot.b, false});
    }
  }

  SUBCASE("renderings stay in sync with the rows") {
    const auto rows = compare(CostScenario::gc, all, 4, 6, kSpot);
    const std::string table = render_cost_table(rows);
    CHECK(table.find("1260") != std::string::npos);
    CHECK(table.find("block_erase") != std::string::npos);
    CHECK(table.find("policy-dependent") != std::string::npos);
    const nlohmann::json rows_json = cost_rows_to_json(rows);
    REQUIRE(rows_json.size() == 5);
    bool saw_po = false;
    for (const auto& row : rows_json)
      if (row.at("scheme") == "partial_overwrite") {
        saw_po = true;
        CHECK(row.at("time") == 1260.0);
        CHECK(row.at("pgm_count").at("upper_bound") == true);
      }
    CHECK(saw_po);
  }
}

TEST_CASE("parameter validation and advisory warnings") {
  CostParams bad = kSpot;
  bad.t_pgm = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(kSpot.warnings().empty());
  CostParams soft = kSpot;
  soft.a = 10.0;
  CHECK(soft.warnings().size() == 1);
}

TEST_CASE("measured runs line up with the analytic model") {
  const Geometry g{4, 4, 16};

  const auto residual_setup = [&](std::uint64_t seed) {
    Rng rng(seed);
    Device dev(g, seed);
    Ftl ftl({ScramblerMode::xor_keystream, seed}, g);
    for (std::uint32_t lpn = 0; lpn < 4; ++lpn) {
      BitString bits(48);
      for (auto& b : bits) b = rng.next_bit() ? 1 : 0;
      ftl.write_logical(dev, lpn, bits, true);
    }
    for (std::uint32_t lpn = 0; lpn < 4; ++lpn) {
      BitString bits(48);
      for (auto& b : bits) b = rng.next_bit() ? 1 : 0;
      ftl.update_logical(dev, lpn, bits);
    }
    return std::pair{std::move(dev), std::move(ftl)};
  };

  SUBCASE("overwrite run stays within the page bound") {
    auto [dev, ftl] = residual_setup(3);
    Rng rng(3);
    const DestructionReport report =
        destroy(ftl, dev, SanitizeScheme::make_po_random(), std::nullopt, rng,
                kSpot);
    CHECK(report.pages.size() == 4);
    CHECK(report.pgm_ops <= report.pages.size());
    CHECK(report.model_time == 4 * kSpot.t_rdg + kSpot.t_pow);
    CHECK_NOTHROW(measured_vs_model(report, kSpot));
  }

  SUBCASE("duty-pulse run programs and erases nothing") {
    auto [dev, ftl] = residual_setup(4);
    Rng rng(4);
    const DestructionReport report = destroy(
        ftl, dev, SanitizeScheme::make_ddp({0.5, 3}), std::nullopt, rng, kSpot);
    CHECK(report.pgm_ops == 0);
    CHECK(report.erase_ops == 0);
    CHECK(report.model_time == 4 * kSpot.t_ddp);
    CHECK_NOTHROW(measured_vs_model(report, kSpot));
  }

  SUBCASE("tampered reports are flagged") {
    auto [dev, ftl] = residual_setup(5);
    Rng rng(5);
    DestructionReport report =
        destroy(ftl, dev, SanitizeScheme::make_slc_fold(CellState::P4),
                std::nullopt, rng, kSpot);
    CHECK_NOTHROW(measured_vs_model(report, kSpot));
    report.erase_ops = 1;
    CHECK_THROWS_AS(measured_vs_model(report, kSpot), Mismatch);
    report.erase_ops = 0;
    report.model_time += 1.0;
    CHECK_THROWS_AS(measured_vs_model(report, kSpot), Mismatch);
  }

  SUBCASE("a block-erase flow costs one erase per victim") {
    auto [dev, ftl] = residual_setup(6);
    const auto before = dev.wear_report(kSpot.a, kSpot.b);
    dev.erase_block(0);
    const auto after = dev.wear_report(kSpot.a, kSpot.b);
    CHECK(after[0].erase_count == before[0].erase_count + 1);
    CHECK(after[0].degradation == before[0].degradation + kSpot.a);
    CHECK(after[1].erase_count == before[1].erase_count);
  }
}
