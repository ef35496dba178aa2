#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "udw/kinematics.hpp"

using namespace udw;

namespace {

// Uniform draw with |value| in [lo, hi], sign random.  The lower bound keeps
// relative comparisons meaningful (dt ~ z near the origin).
double draw(std::mt19937& rng, double lo, double hi) {
    std::uniform_real_distribution<double> mag(lo, hi);
    std::bernoulli_distribution sign(0.5);
    const double m = mag(rng);
    return sign(rng) ? m : -m;
}

const RegulatorPolicy kNoReg{0.0, +1, 0.0};

}  // namespace

TEST_CASE("closed forms at pinned points") {
    const Accel acc{2.0};
    const double a = acc.a;
    const WZPoint p{cplx{0.7, 0.0}, cplx{0.3, 0.0}};
    const IntervalComponents ic = interval_components(acc, p, kNoReg);
    const double sz = std::sinh(0.5 * a * 0.3);
    CHECK(ic.dt.real() == doctest::Approx((2.0 / a) * std::cosh(0.5 * a * 0.7) * sz).epsilon(1e-14));
    CHECK(ic.dx.real() == doctest::Approx((2.0 / a) * std::sinh(0.5 * a * 0.7) * sz).epsilon(1e-14));
    CHECK(ic.dX2.real() == doctest::Approx(-(4.0 / (a * a)) * sz * sz).epsilon(1e-14));
    // dX2 must equal dx^2 - dt^2 (mostly-plus signature)
    const cplx direct = ic.dx * ic.dx - ic.dt * ic.dt;
    CHECK(std::abs(direct - ic.dX2) < 1e-12 * std::abs(ic.dX2));
}

TEST_CASE("tau coordinates invert the sum/difference map") {
    const WZPoint p{cplx{1.25, -0.5}, cplx{-0.75, 0.25}};
    const auto [t2, t1] = tau_from_wz(p);
    CHECK(std::abs((t2 + t1) - p.w) < 1e-15);
    CHECK(std::abs((t2 - t1) - p.z) < 1e-15);
}

TEST_CASE("dX2 is independent of w") {
    const Accel acc{1.0};
    std::mt19937 rng(12345);
    for (int i = 0; i < 10000; ++i) {
        const double w = draw(rng, 0.0, 5.0);
        const double z = draw(rng, 0.0, 5.0);
        const IntervalComponents at_w =
            interval_components(acc, WZPoint{cplx{w, 0.0}, cplx{z, 0.0}}, kNoReg);
        const IntervalComponents at_0 =
            interval_components(acc, WZPoint{cplx{0.0, 0.0}, cplx{z, 0.0}}, kNoReg);
        CHECK(std::abs(at_w.dX2 - at_0.dX2) < 1e-12 * std::max(1.0, std::abs(at_w.dX2)));
    }
}

TEST_CASE("all components are 4 pi i / a periodic in z") {
    const Accel acc{1.0};
    const cplx period{0.0, 4.0 * kPi / acc.a};
    std::mt19937 rng(777);
    for (int i = 0; i < 1000; ++i) {
        const cplx w{draw(rng, 0.05, 5.0), 0.0};
        const cplx z{draw(rng, 0.05, 5.0), 0.0};
        const IntervalComponents base = interval_components_raw(acc, w, z);
        const IntervalComponents shifted = interval_components_raw(acc, w, z + period);
        CHECK(std::abs(shifted.dt - base.dt) < 1e-12 * std::abs(base.dt));
        CHECK(std::abs(shifted.dx - base.dx) < 1e-12 * std::max(std::abs(base.dx), 1e-6));
        CHECK(std::abs(shifted.dX2 - base.dX2) < 1e-12 * std::abs(base.dX2));
    }
}

TEST_CASE("half-period parity: dt flips, dX2 invariant") {
    const Accel acc{1.0};
    const cplx half{0.0, 2.0 * kPi / acc.a};
    std::mt19937 rng(31415);
    for (int i = 0; i < 1000; ++i) {
        const cplx w{draw(rng, 0.05, 5.0), 0.0};
        const cplx z{draw(rng, 0.05, 5.0), 0.0};
        const IntervalComponents base = interval_components_raw(acc, w, z);
        const IntervalComponents shifted = interval_components_raw(acc, w, z + half);
        CHECK(std::abs(shifted.dt + base.dt) < 1e-12 * std::abs(base.dt));
        CHECK(std::abs(shifted.dX2 - base.dX2) < 1e-12 * std::abs(base.dX2));
    }
}

TEST_CASE("components are real for real arguments without regulators") {
    const Accel acc{1.0};
    std::mt19937 rng(99);
    for (int i = 0; i < 1000; ++i) {
        const WZPoint p{cplx{draw(rng, 0.0, 5.0), 0.0}, cplx{draw(rng, 0.0, 5.0), 0.0}};
        const IntervalComponents ic = interval_components(acc, p, kNoReg);
        CHECK(ic.dt.imag() == 0.0);
        CHECK(ic.dx.imag() == 0.0);
        CHECK(ic.dX2.imag() == 0.0);
    }
}

TEST_CASE("regulator policy shifts the arguments") {
    const Accel acc{1.0};
    RegulatorPolicy reg;
    reg.eps_z = 1e-3;
    reg.eps_w = 1e-6;
    reg.eps_w_sign = -1;
    const WZPoint p{cplx{0.4, 0.0}, cplx{0.9, 0.0}};
    const IntervalComponents via_policy = interval_components(acc, p, reg);
    const IntervalComponents direct = interval_components_raw(
        acc, p.w + cplx{0.0, -1e-6}, p.z - cplx{0.0, 1e-3});
    CHECK(std::abs(via_policy.dt - direct.dt) == 0.0);
    CHECK(std::abs(via_policy.dX2 - direct.dX2) == 0.0);
}

TEST_CASE("strip geometry") {
    const Accel acc{2.0};
    CHECK(strip_height(acc) == doctest::Approx(2.0 * kPi));
    CHECK(in_strip(acc, cplx{5.0, 0.0}));
    CHECK(in_strip(acc, cplx{-3.0, 2.0 * kPi}));
    CHECK(!in_strip(acc, cplx{0.0, -0.001}));
    CHECK(!in_strip(acc, cplx{0.0, 2.0 * kPi + 0.001}));
}

TEST_CASE("non-positive acceleration is rejected") {
    CHECK_THROWS_AS((void)interval_components(Accel{0.0}, WZPoint{}, kNoReg),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)interval_components(Accel{-1.0}, WZPoint{}, kNoReg),
                    std::invalid_argument);
}
