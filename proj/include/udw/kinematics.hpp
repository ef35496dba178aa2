#pragma once

// Complexified Rindler-trajectory geometry.  The worldline is the standard
// uniformly accelerated one, t(tau) = a^-1 sinh(a tau), x(tau) = a^-1 cosh(a tau),
// written in the sum/difference coordinates w = tau2 + tau1, z = tau2 - tau1:
//
//   dt  = (2/a) cosh(a w/2) sinh(a z/2)
//   dx  = (2/a) sinh(a w/2) sinh(a z/2)      (boost-direction component)
//   dX2 = dx^2 - dt^2 = -(4/a^2) sinh^2(a z/2)   (w-independent)
//
// Signature is mostly-plus: dX2 = |dx|^2 - dt^2.  All regulators enter here,
// as argument shifts, so every consumer sees one consistent prescription.

#include <complex>
#include <stdexcept>

#include "udw/numeric.hpp"

namespace udw {

struct Accel {
    double a = 1.0;  // proper acceleration, units 1/time (c = 1)
};

struct WZPoint {
    cplx w{0.0, 0.0};  // sum coordinate tau2 + tau1
    cplx z{0.0, 0.0};  // difference coordinate tau2 - tau1
};

// The difference coordinate is shifted below the real axis, z -> z - i*eps_z,
// which pushes the pull-back's singularities to the +i*eps side of the
// contour: the strip 0 <= Im z <= 4pi/a then contains exactly the two pole
// stations {i eps, 2pi i/a + i eps}, and the residue sum reproduces thermal
// detailed balance with the conventional sign (the opposite shift selects the
// stations {2pi i/a - i eps, 4pi i/a - i eps} and inverts the balance; the
// test suite pins this down).  Lorentz-breaking deformations additionally
// need a w regulator, w -> w + i*eps_w_sign*eps_w; results must not depend on
// its sign.
struct RegulatorPolicy {
    double eps_z = 1e-3;
    int eps_w_sign = +1;  // one of {+1, -1}
    double eps_w = 1e-6;
};

struct IntervalComponents {
    cplx dt;   // time interval
    cplx dx;   // boost-direction spatial interval
    cplx dX2;  // invariant interval, dx^2 - dt^2
};

[[nodiscard]] inline std::pair<cplx, cplx> tau_from_wz(const WZPoint& p) {
    return {0.5 * (p.w + p.z), 0.5 * (p.w - p.z)};
}

// Raw evaluation at explicitly complex (w, z): no regulator applied.  Used
// where a shift is already written into the arguments (e.g. the KMS
// periodicity check evaluates both sides of the shifted identity directly).
[[nodiscard]] inline IntervalComponents interval_components_raw(const Accel& acc, cplx w, cplx z) {
    const double a = acc.a;
    const cplx sz = std::sinh(0.5 * a * z);
    IntervalComponents ic;
    ic.dt = (2.0 / a) * std::cosh(0.5 * a * w) * sz;
    ic.dx = (2.0 / a) * std::sinh(0.5 * a * w) * sz;
    ic.dX2 = -(4.0 / (a * a)) * sz * sz;  // closed form: never form dx^2 - dt^2
    return ic;
}

[[nodiscard]] inline IntervalComponents interval_components(const Accel& acc, const WZPoint& p,
                                                            const RegulatorPolicy& reg) {
    if (!(acc.a > 0.0)) throw std::invalid_argument("interval_components: a must be > 0");
    const cplx wt = p.w + cplx(0.0, reg.eps_w_sign * reg.eps_w);
    const cplx zt = p.z - cplx(0.0, reg.eps_z);
    return interval_components_raw(acc, wt, zt);
}

// Strip geometry of the difference coordinate: residues are summed over
// 0 <= Im z <= 4pi/a.
[[nodiscard]] inline double strip_height(const Accel& acc) { return 4.0 * kPi / acc.a; }

[[nodiscard]] inline bool in_strip(const Accel& acc, cplx z) {
    return z.imag() >= 0.0 && z.imag() <= strip_height(acc);
}

}  // namespace udw
