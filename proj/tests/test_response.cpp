#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "udw/response.hpp"

using namespace udw;

namespace {

const Accel kAcc{1.0};
const RegulatorPolicy kReg{};  // eps_z = 1e-3, eps_w_sign = +1, eps_w = 1e-6

double planck(double omega, double a) { return omega / (std::exp(2.0 * kPi * omega / a) - 1.0); }

}  // namespace

TEST_CASE("undeformed spectrum is Planckian at the horizon temperature") {
    const PullbackModel und{kAcc, nullptr, kReg};
    const std::vector<double> omegas{0.25, 0.5, 1.0, 2.0};
    std::vector<ResponseResult> rs;
    for (double o : omegas) rs.push_back(response_adiabatic(und, o));
    for (const auto& r : rs) {
        REQUIRE(!r.gated);
        REQUIRE(r.converged);
        // the residue sum lands on the real axis up to roundoff
        CHECK(std::abs(r.value.imag()) <= 1e-12 * std::abs(r.value.real()));
        // hard positivity, not merely positivity within the error bar
        CHECK(r.value.real() > 0.0);
    }
    // every pairwise ratio matches the Planck form
    for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = 0; j < rs.size(); ++j) {
            if (i == j) continue;
            const double got = rs[i].value.real() / rs[j].value.real();
            const double want = planck(omegas[i], kAcc.a) / planck(omegas[j], kAcc.a);
            CHECK(std::abs(got / want - 1.0) < 1e-3);
        }
    // absolute normalization: F = planck / (4 pi) up to the regulator residual
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const double norm = rs[i].value.real() / planck(omegas[i], kAcc.a);
        CHECK(std::abs(norm * 4.0 * kPi - 1.0) < 1e-4);
    }
}

TEST_CASE("prefactor and residue-sum zeros cancel near zero frequency") {
    // 1/(1 - e^{4 pi O / a}) diverges as O -> 0 while the residue sum
    // vanishes; their product must stay pinned near the O = 0 limit 1/(8 pi^2)
    const PullbackModel und{kAcc, nullptr, kReg};
    ResponseOptions opts;
    opts.min_abs_omega = 1e-5;
    const double limit = 1.0 / (8.0 * kPi * kPi);
    for (double o : {1e-3, -1e-3, 1e-4, -1e-4}) {
        const ResponseResult r = response_adiabatic(und, o, opts);
        REQUIRE(!r.nonfinite);
        CHECK(std::abs(r.value.real() - limit) < 0.02 * limit);
        CHECK(std::abs(r.value.imag()) < 1e-10);
    }
    // the default floor refuses frequencies it cannot resolve
    CHECK_THROWS_AS((void)response_adiabatic(und, 1e-4), std::invalid_argument);
}

TEST_CASE("detailed balance gap vanishes for thermal entries, calibration-free") {
    const PullbackModel und{kAcc, nullptr, kReg};
    const BalanceGap und_gap = detailed_balance_gap(und, 1.0);
    REQUIRE(und_gap.ok);
    CHECK(std::abs(und_gap.gap) < 1e-4);
    for (const std::string id : {"1", "2"}) {
        const PullbackModel m{kAcc, find_spec(id), kReg};
        const BalanceGap g = detailed_balance_gap(m, 1.0);
        REQUIRE(g.ok);
        CHECK(std::abs(g.gap) < 1e-4);
    }
}

TEST_CASE("residue and quadrature routes differ by one shared constant") {
    const PullbackModel und{kAcc, nullptr, kReg};
    const Calibration c0 = measure_calibration(und, 0.5);
    REQUIRE(c0.ok);
    CHECK(c0.constant > 0.0);
    const PullbackModel m1{kAcc, find_spec("1"), kReg};
    const Calibration c1 = measure_calibration(m1, 0.5);
    REQUIRE(c1.ok);
    // the constant belongs to the method pair, not to the entry
    CHECK(std::abs(c1.constant / c0.constant - 1.0) < 0.02);
    // and it is the switching-profile normalization factor 2
    CHECK(std::abs(c0.constant - 2.0) < 0.01);
}

TEST_CASE("dressed pole census of the first catalog entry") {
    // 1 + D = 0 at dX2 = -ell^2: dressed poles at z = +-(2/a) asinh(a ell / 2)
    // shifted up by i eps_z, repeated at every station rung by periodicity.
    const DeformationSpec* d1 = find_spec("1");
    REQUIRE(d1 != nullptr);
    const PullbackModel m{kAcc, d1, kReg};
    const CFunc f = pullback_zslice(m, 0.0);
    PoleScanParams params = response_scan_params(m);
    params.with_residues = true;
    bool complete = false, clipped = false;
    const Rect strip{-6.0, 6.0, -0.05, 4.0 * kPi + 0.05};
    const auto poles = locate_poles(f, strip, params, &complete, &clipped);
    REQUIRE(complete);
    REQUIRE(!clipped);
    REQUIRE(poles.size() == 9);

    const double zstar = 2.0 * std::asinh(0.5 * kAcc.a * d1->ell) / kAcc.a;
    const double rungs[3] = {0.0, 2.0 * kPi / kAcc.a, 4.0 * kPi / kAcc.a};
    int stations = 0, dressed = 0;
    cplx res_plus{}, res_minus{};
    for (const auto& p : poles) {
        // every pole sits i*eps_z above one of the three station rungs
        double dim = 1e300;
        for (double r : rungs) dim = std::min(dim, std::abs(p.position.imag() - r - kReg.eps_z));
        CHECK(dim < 1e-8);
        if (p.order == 2) {
            ++stations;
            CHECK(std::abs(p.position.real()) < 1e-10);
            // csch^2 alone has no 1/z term: station residue is zero
            CHECK(std::abs(p.residue) < 1e-10);
        } else {
            ++dressed;
            REQUIRE(p.order == 1);
            CHECK(std::abs(std::abs(p.position.real()) - zstar) < 1e-10);
            CHECK(p.residue_converged);
            if (p.position.real() > 0.0)
                res_plus = p.residue;
            else
                res_minus = p.residue;
            // the kernel is 2 pi i / a periodic on a fixed-w slice, so the
            // residue repeats identically on every rung
            CHECK(std::abs(std::abs(p.residue.real()) - 0.25322383901673445) < 1e-10);
            CHECK(std::abs(p.residue.imag()) < 1e-12);
        }
    }
    CHECK(stations == 3);
    CHECK(dressed == 6);
    // the dressed pair carries opposite residues
    CHECK(std::abs(res_plus + res_minus) < 1e-10);
}

TEST_CASE("regulator direction does not move the response") {
    // the w regulator w -> w + i * sign * eps_w is an evaluation device; both
    // directions must give the same adiabatic value for every entry that
    // breaks stationarity
    ResponseOptions light;
    light.sigma_ladder = {20.0};
    light.eps_extrapolate = false;
    for (const std::string id : {"5", "6", "7", "8"}) {
        const DeformationSpec* d = find_spec(id);
        REQUIRE(d != nullptr);
        cplx v[2];
        int k = 0;
        for (int sgn : {+1, -1}) {
            RegulatorPolicy reg = kReg;
            reg.eps_w_sign = sgn;
            const PullbackModel m{kAcc, d, reg};
            const ResponseResult r = response_adiabatic(m, 1.0, light);
            REQUIRE(!r.gated);
            REQUIRE(!r.nonfinite);
            v[k++] = r.value;
        }
        const double scale = std::max({std::abs(v[0]), std::abs(v[1]), 1e-300});
        CHECK(std::abs(v[0] - v[1]) / scale < 1e-4);
    }
}
