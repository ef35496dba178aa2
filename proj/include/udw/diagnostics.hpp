#pragma once

// Classification engine: four KMS sub-condition checks (imaginary-time
// periodicity, stationarity, strip holomorphicity, polynomial boundedness),
// the three preservation conditions (A: per-cluster residue convergence,
// B: w-integrability of the residue sum, C: pole confinement to the strip),
// the detailed-balance gap, and the assembled verdict row.
//
// Verdicts are tri-state: numerical non-convergence must stay distinguishable
// from a measured violation.  Symmetry checks use 1e-8 relative, convergence
// checks 1e-4 relative, both after removing the contour regulator by 2-point
// extrapolation in eps_z.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "udw/analysis.hpp"
#include "udw/kinematics.hpp"
#include "udw/numeric.hpp"
#include "udw/response.hpp"
#include "udw/wightman.hpp"

namespace udw {

struct DiagnosticsOptions {
    Accel a{};
    RegulatorPolicy reg{};
    ResponseOptions response{};
    double omega = 1.0;
    int grid_n = 32;
    double grid_half = 4.0;  // grid spans [-grid_half, grid_half]/a in w and z
    std::vector<double> ell_ladder{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> w_ladder_B{5.0, 10.0, 20.0, 40.0};
    double sigma_B = 20.0;   // width of the gaussian weight in the B integral
    double sym_tol = 1e-8;
    double conv_tol = 1e-4;
    double growth_rate_tol = 0.05;
    bool with_balance = true;  // skip the (expensive) balance gap when unused
};

struct CheckResult {
    TriState verdict = TriState::indeterminate;
    double deviation = std::numeric_limits<double>::quiet_NaN();
    std::string detail;
};

// ---------------------------------------------------------------------------
// KMS sub-condition 1: imaginary periodicity.
// Both sides of  W(tau' + i beta - i eps, tau'') = W(tau'', tau' - i eps)
// evaluated raw (the explicit i*eps IS the regulator here, so the evaluation
// path must not add another shift).  In (w, z) coordinates the two sides are
//   LHS: (w + i(beta - eps), -z + i(beta - eps)),  RHS: (w - i eps, z + i eps).
// Sides are compared in log space so kernels far above double range (the
// Gaussian entry) stay checkable: the deviation |W_a/W_b - 1|, with the
// larger side in the denominator, comes from the log difference reduced
// mod 2 pi i (principal branches cancel only up to whole turns).

namespace detail {

[[nodiscard]] inline double log_relative_deviation(cplx log_a, cplx log_b) {
    cplx d = log_a - log_b;
    d = cplx{d.real(), std::remainder(d.imag(), 2.0 * kPi)};
    if (d.real() > 0.0) d = -d;
    return std::abs(std::exp(d) - 1.0);
}

}  // namespace detail

[[nodiscard]] inline CheckResult check_imaginary_periodicity(const PullbackModel& model,
                                                             double beta,
                                                             const DiagnosticsOptions& opts) {
    CheckResult res;
    const double a = model.a.a;
    const double half = opts.grid_half / a;
    const int n = opts.grid_n;
    auto max_dev_at = [&](double eps) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double w0 = -half + (2.0 * half) * (i + 0.5) / n;
                double z0 = -half + (2.0 * half) * (j + 0.5) / n;
                bool done = false;
                for (int attempt = 0; attempt < 4 && !done; ++attempt) {
                    const double off = attempt * 0.0137 * (2.0 * half) / n;
                    const cplx shift{0.0, beta - eps};
                    EvalStatus st;
                    const cplx lhs = pullback_log_eval_raw(model, cplx{w0 + off, 0.0} + shift,
                                                           cplx{-(z0 + off), 0.0} + shift, &st);
                    const cplx rhs = pullback_log_eval_raw(model, cplx{w0 + off, -eps},
                                                           cplx{z0 + off, eps}, &st);
                    if (st.singular || !std::isfinite(std::abs(lhs)) ||
                        !std::isfinite(std::abs(rhs)))
                        continue;
                    worst = std::max(worst, detail::log_relative_deviation(lhs, rhs));
                    done = true;
                }
                if (!done) throw std::runtime_error("periodicity: singular grid point persisted");
            }
        return worst;
    };
    const double eps = model.reg.eps_z;
    const double d1 = max_dev_at(eps);
    const double d2 = max_dev_at(0.5 * eps);
    res.deviation = std::max(0.0, 2.0 * d2 - d1);  // linear extrapolation to eps = 0
    res.verdict = res.deviation < opts.sym_tol ? TriState::yes : TriState::no;
    res.detail = "max relative deviation " + format_g17(res.deviation);
    return res;
}

// ---------------------------------------------------------------------------
// KMS sub-condition 2: stationarity.  Finite-difference d/dw of log W on the
// grid: |d(log W)/dw| / a equals the relative drift |dW/dw| / (a |W|) and
// stays finite where W overflows.  The log difference of two points h apart
// is reduced mod 2 pi i against principal-branch jumps.

[[nodiscard]] inline CheckResult check_stationarity(const PullbackModel& model,
                                                    const DiagnosticsOptions& opts) {
    CheckResult res;
    const double a = model.a.a;
    const double half = opts.grid_half / a;
    const int n = opts.grid_n;
    const double h = 1e-5 / a;
    auto max_dev_at = [&](double eps) {
        PullbackModel m = model;
        m.reg.eps_z = eps;
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double w0 = -half + (2.0 * half) * (i + 0.5) / n;
                double z0 = -half + (2.0 * half) * (j + 0.5) / n;
                bool done = false;
                for (int attempt = 0; attempt < 4 && !done; ++attempt) {
                    const double off = attempt * 0.0137 * (2.0 * half) / n;
                    EvalStatus st;
                    const cplx lm = pullback_log_eval(m, WZPoint{cplx{w0 + off - h, 0.0},
                                                                 cplx{z0 + off, 0.0}}, &st);
                    const cplx lp = pullback_log_eval(m, WZPoint{cplx{w0 + off + h, 0.0},
                                                                 cplx{z0 + off, 0.0}}, &st);
                    if (st.singular || !std::isfinite(std::abs(lm)) ||
                        !std::isfinite(std::abs(lp)))
                        continue;
                    cplx d = lp - lm;
                    d = cplx{d.real(), std::remainder(d.imag(), 2.0 * kPi)};
                    worst = std::max(worst, std::abs(d) / (2.0 * h * a));
                    done = true;
                }
                if (!done) throw std::runtime_error("stationarity: singular grid point persisted");
            }
        return worst;
    };
    const double eps = model.reg.eps_z;
    const double d1 = max_dev_at(eps);
    const double d2 = max_dev_at(0.5 * eps);
    res.deviation = std::max(0.0, 2.0 * d2 - d1);
    res.verdict = res.deviation < opts.sym_tol ? TriState::yes : TriState::no;
    res.detail = "max |dW/dw| / (a|W|) = " + format_g17(res.deviation);
    return res;
}

// ---------------------------------------------------------------------------
// KMS sub-condition 3: holomorphicity in the lower strip Im z in [-2 pi/a, 0].
// The scan window is inset by delta = max(2 eps, 0.01/a): the regulated
// undeformed poles hug the boundary at distance eps and are permitted, so any
// pole the inset scan finds is interior and fatal.  Requiring the find at
// both regulator rungs guards against scan artifacts.

struct HolomorphicityResult {
    TriState verdict = TriState::indeterminate;
    std::vector<cplx> offending;
    std::string detail;
};

[[nodiscard]] inline HolomorphicityResult check_holomorphicity(const PullbackModel& model,
                                                               const DiagnosticsOptions& opts) {
    (void)opts;
    HolomorphicityResult res;
    if (model.deformation && model.deformation->entire_deformation) {
        // No denominator in the closed form: 1 + D is holomorphic on the whole
        // strip and the kernel's only poles are the boundary stations.  The
        // numerical census cannot certify this itself -- |D| overflows on the
        // wings and the argument principle would need samples growing like the
        // exponent -- so the form-level fact decides.
        res.verdict = TriState::yes;
        res.detail = "deformation has no denominator: station poles only "
                     "(interior scan skipped, kernel exceeds double range)";
        return res;
    }
    const double a = model.a.a;
    const double L = 8.0 / a;
    bool complete = true, clipped = false;
    auto scan_at = [&](double eps) {
        PullbackModel m = model;
        m.reg.eps_z = eps;
        const double ins = std::max(2.0 * eps, 0.01 / a);
        const Rect window{-L - 0.0423 / a, L + 0.0117 / a,
                          -2.0 * kPi / a + ins + 0.0031 / a, -ins - 0.0047 / a};
        PoleScanParams params = response_scan_params(m);
        bool ok = true, clip = false;
        const auto poles = locate_poles(pullback_zslice(m, 0.0), window, params, &ok, &clip);
        complete = complete && ok;
        clipped = clipped || clip;
        return poles;
    };
    const double eps = model.reg.eps_z;
    const std::vector<Pole> p1 = scan_at(eps);
    const std::vector<Pole> p2 = scan_at(0.5 * eps);
    if (!complete) {
        res.verdict = TriState::indeterminate;
        res.detail = "pole scan incomplete";
        return res;
    }
    const double match_tol = std::max(10.0 * eps, 0.02 / a);
    bool unstable = false;
    for (const Pole& p : p2) {
        bool matched = false;
        for (const Pole& q : p1)
            if (std::abs(p.position - q.position) < match_tol) matched = true;
        if (matched)
            res.offending.push_back(p.position);
        else
            unstable = true;
    }
    if (unstable && res.offending.empty()) {
        res.verdict = TriState::indeterminate;
        res.detail = "pole scan unstable across the regulator ladder";
        return res;
    }
    res.verdict = res.offending.empty() ? TriState::yes : TriState::no;
    res.detail = res.offending.empty()
                     ? "no interior poles in the inset window"
                     : std::to_string(res.offending.size()) + " interior pole(s)";
    if (clipped) res.detail += " (overflow plateaus excluded from the scan)";
    return res;
}

// ---------------------------------------------------------------------------
// KMS sub-condition 4: polynomial boundedness in the strip coordinates,
// probed along real-w rays at fixed z and along Re z rays at fixed w.

struct PolyBoundResult {
    TriState verdict = TriState::indeterminate;
    double exponent = 0.0;  // worst power-law exponent, or growth rate if exponential
    std::string tag;        // "bounded" | "polynomial" | "exponential" | "overflow"
    std::string detail;
};

[[nodiscard]] inline PolyBoundResult check_polynomial_bound(const PullbackModel& model,
                                                            const DiagnosticsOptions& opts) {
    (void)opts;
    PolyBoundResult res;
    const double a = model.a.a;
    const std::vector<double> ts{10.0 / a, 20.0 / a, 40.0 / a, 80.0 / a};
    bool any_exp = false, any_overflow = false;
    double worst_power = -std::numeric_limits<double>::infinity();
    double worst_rate = 0.0;
    auto probe = [&](auto&& point_at) {
        std::vector<double> mags;
        for (double t : ts)
            mags.push_back(std::abs(pullback_eval(model, point_at(t))));
        const GrowthFit g = classify_growth(ts, mags);
        if (g.cls == GrowthClass::exponential) {
            any_exp = true;
            any_overflow = any_overflow || g.overflow;
            worst_rate = std::max(worst_rate, g.rate);
        } else {
            worst_power = std::max(worst_power, g.power);
        }
    };
    // w rays at fixed regular z inside the strip
    for (const cplx z0 : {cplx{0.31, 1.7 / a}, cplx{1.1, 0.9 / a}})
        for (double sgn : {1.0, -1.0})
            probe([&](double t) { return WZPoint{cplx{sgn * t, 0.0}, z0}; });
    // Re z rays inside the strip at fixed w
    for (double w0 : {0.0, 1.0 / a})
        for (double y0 : {0.9 / a, 3.3 / a})
            for (double sgn : {1.0, -1.0})
                probe([&](double t) { return WZPoint{cplx{w0, 0.0}, cplx{sgn * t, y0}}; });
    if (any_exp) {
        res.verdict = TriState::no;
        res.exponent = worst_rate;
        res.tag = any_overflow ? "overflow" : "exponential";
    } else {
        res.verdict = TriState::yes;
        res.exponent = worst_power;
        res.tag = worst_power > 0.1 ? "polynomial" : "bounded";
    }
    res.detail = res.tag + ", exponent " + format_g17(res.exponent);
    return res;
}

// ---------------------------------------------------------------------------
// Condition A: per-cluster residue convergence.  Clusters are fixed circles
// of radius pi/(2a) around the in-strip undeformed stations; only poles
// inside the closed strip count as members (the strip sum is what enters the
// response).  Each cluster total V_i(ell) must behave as a Cauchy sequence
// along the descending ladder and its ell -> 0 extrapolation must land on
// the undeformed station residue R0_i to conv_tol relative.  In-strip poles
// assigned to no station are strays; their total magnitude must vanish.

struct ConditionAResult {
    TriState verdict = TriState::indeterminate;
    struct Cluster {
        cplx anchor{};
        cplx R0{};
        std::vector<double> ells;
        std::vector<cplx> V;
        cplx extrapolated{};
        double rel_dev = std::numeric_limits<double>::quiet_NaN();
        bool cauchy = false;
        double w_probe = 0.0;
    };
    std::vector<Cluster> clusters;
    double stray_mag = 0.0;  // at the smallest ladder rung, eps-extrapolated
    std::string detail;
};

namespace detail {

struct ClusterSums {
    std::vector<cplx> V;      // per anchor
    double stray = 0.0;       // total |residue| of unanchored in-strip poles
    bool reliable = true;
};

inline ClusterSums cluster_sums_at(const PullbackModel& model, double omega, double sigma,
                                   double w_probe, const std::vector<cplx>& anchors,
                                   const ResponseOptions& ropts) {
    ClusterSums out;
    out.V.assign(anchors.size(), cplx{});
    StripPoleCache cache;
    const auto& poles = poles_at(model, w_probe, cache, ropts.rescan_every);
    const CFunc base = pullback_zslice(model, w_probe);
    const double inv_s2 = 1.0 / (sigma * sigma);
    const cplx miO{0.0, -omega};
    const CFunc f = [&](cplx z) {
        return std::exp(-z * z * inv_s2) * base(z) * std::exp(miO * z);
    };
    const double circle = 0.5 * kPi / model.a.a;
    for (const Pole& p : poles) {
        if (!in_strip(model.a, p.position)) continue;
        bool ok = false;
        cplx r;
        if (p.cluster_id >= 0)
            r = cluster_residue(f, p.position, p.iso_radius, 2.0 * p.iso_radius, 1e-9, &ok);
        else
            r = circle_residue_integral(f, p.position, p.iso_radius, 1e-9, &ok);
        out.reliable = out.reliable && ok;
        std::size_t best = anchors.size();
        double best_d = circle;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            const double d = std::abs(p.position - anchors[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best < anchors.size())
            out.V[best] += r;
        else
            out.stray += std::abs(r);
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline ConditionAResult check_condition_A(const DeformationSpec& base, double omega,
                                                        const std::vector<double>& ell_ladder,
                                                        const DiagnosticsOptions& opts) {
    ConditionAResult res;
    std::vector<double> ladder = ell_ladder;
    std::sort(ladder.begin(), ladder.end(), std::greater<double>());
    const Accel acc = opts.a;
    const double sigma = opts.response.sigma_ladder.back();
    const bool stationary = base.lorentz_invariant;
    const std::vector<double> probes = stationary ? std::vector<double>{0.0}
                                                  : std::vector<double>{0.0, 1.0};
    bool reliable = true;
    bool all_pass = true;
    double stray_last = 0.0;

    for (double w_probe : probes) {
        // anchors and undeformed references, eps-extrapolated
        std::vector<cplx> anchors1, anchors2;
        std::vector<cplx> R0;
        {
            RegulatorPolicy r1 = opts.reg, r2 = opts.reg;
            r2.eps_z *= 0.5;
            anchors1 = stations_in(acc, r1, 0.0, strip_height(acc));
            anchors2 = stations_in(acc, r2, 0.0, strip_height(acc));
            const PullbackModel u1{acc, nullptr, r1}, u2{acc, nullptr, r2};
            const detail::ClusterSums s1 =
                detail::cluster_sums_at(u1, omega, sigma, w_probe, anchors1, opts.response);
            const detail::ClusterSums s2 =
                detail::cluster_sums_at(u2, omega, sigma, w_probe, anchors2, opts.response);
            reliable = reliable && s1.reliable && s2.reliable &&
                       s1.V.size() == s2.V.size();
            R0.resize(anchors1.size());
            for (std::size_t i = 0; i < R0.size() && i < s1.V.size(); ++i)
                R0[i] = 2.0 * s2.V[i] - s1.V[i];
        }
        std::vector<ConditionAResult::Cluster> clusters(anchors1.size());
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            clusters[i].anchor = anchors1[i];
            clusters[i].R0 = R0[i];
            clusters[i].w_probe = w_probe;
        }
        double stray_at_min = 0.0;
        for (double ell : ladder) {
            DeformationSpec spec = base;
            spec.ell = ell;
            RegulatorPolicy r1 = opts.reg, r2 = opts.reg;
            r2.eps_z *= 0.5;
            r2.eps_w *= 0.5;
            const PullbackModel m1{acc, &spec, r1}, m2{acc, &spec, r2};
            const detail::ClusterSums s1 =
                detail::cluster_sums_at(m1, omega, sigma, w_probe, anchors1, opts.response);
            const detail::ClusterSums s2 =
                detail::cluster_sums_at(m2, omega, sigma, w_probe, anchors2, opts.response);
            reliable = reliable && s1.reliable && s2.reliable;
            for (std::size_t i = 0; i < clusters.size(); ++i) {
                clusters[i].ells.push_back(ell);
                clusters[i].V.push_back(2.0 * s2.V[i] - s1.V[i]);
            }
            stray_at_min = std::max(0.0, 2.0 * s2.stray - s1.stray);
        }
        double r0_floor = std::numeric_limits<double>::infinity();
        for (const cplx r0 : R0) r0_floor = std::min(r0_floor, std::abs(r0));
        stray_last = std::max(stray_last, stray_at_min);
        for (auto& c : clusters) {
            // Cauchy behavior: successive changes must not grow (noise floor
            // keeps exactly-converged sequences from tripping on roundoff)
            c.cauchy = c.V.size() >= 2;
            const double floor = 1e-10 * std::max(std::abs(c.R0), 1e-300);
            double prev_d = -1.0;
            for (std::size_t k = 0; k + 1 < c.V.size(); ++k) {
                const double d = std::abs(c.V[k] - c.V[k + 1]);
                if (prev_d >= 0.0 && d > std::max(0.9 * prev_d, floor)) c.cauchy = false;
                prev_d = d;
            }
            const std::size_t n = c.V.size();
            const std::size_t take = std::min<std::size_t>(3, n);
            const std::vector<double> xs(c.ells.end() - take, c.ells.end());
            const std::vector<cplx> ys(c.V.end() - take, c.V.end());
            c.extrapolated = lagrange_zero(xs, ys);
            c.rel_dev = std::abs(c.extrapolated - c.R0) / std::max(std::abs(c.R0), 1e-300);
            all_pass = all_pass && c.cauchy && c.rel_dev < opts.conv_tol;
            res.clusters.push_back(c);
        }
        all_pass = all_pass && stray_at_min < opts.conv_tol * r0_floor;
    }
    res.stray_mag = stray_last;
    if (!reliable && all_pass) {
        res.verdict = TriState::indeterminate;
        res.detail = "cluster integrals unreliable";
    } else {
        res.verdict = all_pass ? TriState::yes : TriState::no;
        double worst = 0.0;
        for (const auto& c : res.clusters)
            if (std::isfinite(c.rel_dev)) worst = std::max(worst, c.rel_dev);
        res.detail = "worst extrapolated cluster deviation " + format_g17(worst) +
                     ", stray magnitude " + format_g17(res.stray_mag);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Condition B: w-integrability of the residue sum.  Primary criterion: the
// gaussian-weighted integral of S(w) converges on doubling domains to 1e-6
// relative (with a step-halving cross-check).  The |S| ladder fit is reported
// as growth data and decides failures when the integral cannot be formed.

struct ConditionBResult {
    TriState verdict = TriState::indeterminate;
    double rate = 0.0;  // exponential rate fit of |S(w)| on the ladder
    std::vector<double> w_ladder;
    std::vector<double> mags;
    bool integral_converged = false;
    double last_rel_change = std::numeric_limits<double>::quiet_NaN();
    std::string detail;
};

[[nodiscard]] inline ConditionBResult check_condition_B(const PullbackModel& model, double omega,
                                                        double sigma,
                                                        const std::vector<double>& w_ladder,
                                                        const DiagnosticsOptions& opts) {
    ConditionBResult res;
    res.w_ladder = w_ladder;
    StripPoleCache cache;
    std::map<double, cplx> memo;
    bool all_ok = true;
    auto S = [&](double w) {
        const auto it = memo.find(w);
        if (it != memo.end()) return it->second;
        bool ok = true;
        const cplx s = residue_sum_at_w(model, omega, sigma, w, cache, opts.response, &ok);
        all_ok = all_ok && ok;
        memo.emplace(w, s);
        return s;
    };
    if (model_stationary(model)) {
        res.verdict = TriState::yes;
        res.rate = 0.0;
        res.integral_converged = true;
        res.detail = "stationary: residue sum independent of w";
        return res;
    }
    for (double w : w_ladder) {
        const double m = std::max(std::abs(S(w)), std::abs(S(-w)));
        res.mags.push_back(m);
    }
    bool finite_mags = true;
    for (double m : res.mags) finite_mags = finite_mags && std::isfinite(m);
    if (finite_mags) {
        std::vector<double> ly;
        for (double m : res.mags) ly.push_back(std::log(std::max(m, 1e-300)));
        res.rate = linear_fit(w_ladder, ly).slope;
    } else {
        res.rate = std::numeric_limits<double>::infinity();
    }
    // doubling-domain integrals of e^{-w^2/sigma_B^2} S(w), trapezoid h = 0.5/a
    const double sb = opts.sigma_B / model.a.a;
    const double h = 0.5 / model.a.a;
    auto weighted_integral = [&](double D, double step) {
        cplx acc{};
        const long n = std::lround(D / step);
        for (long k = -n; k <= n; ++k) {
            const double w = k * step;
            const double g = std::exp(-(w * w) / (sb * sb));
            cplx term = g * S(w);
            if (k == -n || k == n) term *= 0.5;
            acc += term;
        }
        return acc * step;
    };
    const double D1 = 2.0 * sb, D2 = 4.0 * sb, D3 = 8.0 * sb;
    const cplx I1 = weighted_integral(D1, h);
    const cplx I2 = weighted_integral(D2, h);
    const cplx I3 = weighted_integral(D3, h);
    const cplx I3h = weighted_integral(D3, 0.5 * h);
    const double scale = std::max({std::abs(I3), std::abs(I2), 1e-300});
    const double dom_change = std::abs(I3 - I2) / scale;
    const double step_change = std::abs(I3h - I3) / std::max(std::abs(I3h), 1e-300);
    res.last_rel_change = dom_change;
    const bool finite_all = std::isfinite(std::abs(I1 + I2 + I3 + I3h));
    res.integral_converged = finite_all && dom_change < 1e-6 && step_change < 1e-6;
    if (res.integral_converged && all_ok) {
        res.verdict = TriState::yes;
        res.detail = "weighted integral stable to " + format_g17(dom_change);
    } else if (!res.integral_converged &&
               (res.rate > opts.growth_rate_tol || !finite_all || !finite_mags)) {
        res.verdict = TriState::no;
        res.detail = "residue sum grows (rate " + format_g17(res.rate) + ")";
    } else {
        res.verdict = TriState::indeterminate;
        res.detail = "integral not converged, growth inconclusive";
    }
    return res;
}

// ---------------------------------------------------------------------------
// Condition C: pole confinement.  Trajectories are tracked over the
// descending ladder in the enlarged scan window; positions are reported in
// regulator-compensated coordinates (Im shifted by -eps_z: the catalog's pole
// loci are rigid translations by +i eps_z of the unregulated ones).
// The verdict is NO when a trajectory
//   (i)  stays strictly interior but its ell -> 0 limit lands on the strip
//        boundary (the limit splits off the boundary station),
//   (ii) stays interior with no undeformed-station ancestry at all, or
//   (iii) has station ancestry but leaves the closed strip.

struct ConditionCResult {
    TriState verdict = TriState::indeterminate;
    std::vector<std::string> events;
    std::string detail;
};

[[nodiscard]] inline ConditionCResult check_condition_C(const DeformationSpec& base,
                                                        const std::vector<double>& ell_ladder,
                                                        const DiagnosticsOptions& opts) {
    ConditionCResult res;
    const Accel acc = opts.a;
    const double a = acc.a;
    const double eps = opts.reg.eps_z;
    const double H = strip_height(acc);
    const double delta = std::max(5.0 * eps, 5e-3 / a);
    const std::vector<cplx> stations{{0.0, 0.0}, {0.0, 2.0 * kPi / a}, {0.0, 4.0 * kPi / a}};
    const std::vector<double> probes = base.lorentz_invariant ? std::vector<double>{0.0}
                                                              : std::vector<double>{0.0, 1.0};
    bool any_no = false, any_unreliable = false;
    for (double w_probe : probes) {
        auto scan = [&](double ell) {
            DeformationSpec spec = base;
            spec.ell = ell;
            const PullbackModel m{acc, &spec, opts.reg};
            PoleScanParams params = response_scan_params(m);
            return locate_poles(pullback_zslice(m, w_probe), default_scan_region(acc), params);
        };
        TrackParams tp;
        tp.ladder = ell_ladder;
        const TrackResult tr = track_poles(scan, tp);
        for (const std::string& e : tr.events) res.events.push_back(e);
        for (const auto& t : tr.trajectories) {
            if (!t.limit_ok) {
                any_unreliable = true;
                continue;
            }
            auto comp = [&](cplx z) { return z - cplx{0.0, eps}; };
            const cplx limit = comp(t.limit);
            bool all_interior = true, any_outside = false;
            for (const auto& p : t.poles) {
                const double im = comp(p.position).imag();
                all_interior = all_interior && im > delta && im < H - delta;
                any_outside = any_outside || im < -delta || im > H + delta;
            }
            double station_d = std::numeric_limits<double>::infinity();
            for (const cplx s : stations) station_d = std::min(station_d, std::abs(limit - s));
            const double anc_tol = std::max(delta, 3.0 * t.limit_err);
            const bool ancestry = station_d < anc_tol;
            const bool limit_on_boundary =
                std::abs(limit.imag()) < anc_tol || std::abs(limit.imag() - H) < anc_tol;
            std::string what;
            if (all_interior && limit_on_boundary)
                what = "interior trajectory with boundary limit";
            else if (all_interior && !ancestry)
                what = "interior trajectory without station ancestry";
            else if (ancestry && any_outside)
                what = "station-descended trajectory leaves the strip";
            if (!what.empty()) {
                any_no = true;
                res.events.push_back(what + " near " + format_g17(limit.real()) + "+" +
                                     format_g17(limit.imag()) + "i");
            }
        }
        if (!tr.refined_out) any_unreliable = true;
    }
    if (any_no)
        res.verdict = TriState::no;
    else if (any_unreliable)
        res.verdict = TriState::indeterminate;
    else
        res.verdict = TriState::yes;
    res.detail = res.verdict == TriState::no ? "confinement violated" : "poles confined";
    return res;
}

// ---------------------------------------------------------------------------
// assembled verdict row

struct VerdictReport {
    std::string spec_id;
    CheckResult periodicity;
    CheckResult stationarity;
    HolomorphicityResult holomorphicity;
    PolyBoundResult polynomial;
    ConditionAResult cond_A;
    ConditionBResult cond_B;
    ConditionCResult cond_C;
    BalanceGap balance;
    TriState preservation = TriState::indeterminate;
    bool gated = false;  // interval-falloff gate: residue-route fields refused
};

[[nodiscard]] inline TriState combine_preservation(TriState A, TriState B, TriState C) {
    if (A == TriState::no || B == TriState::no || C == TriState::no) return TriState::no;
    if (A == TriState::indeterminate || B == TriState::indeterminate ||
        C == TriState::indeterminate)
        return TriState::indeterminate;
    return TriState::yes;
}

[[nodiscard]] inline VerdictReport classify(const DeformationSpec* spec,
                                            const DiagnosticsOptions& opts) {
    VerdictReport rep;
    rep.spec_id = spec ? spec->id : "undeformed";
    const PullbackModel model{opts.a, spec, opts.reg};
    const double beta = 2.0 * kPi / opts.a.a;
    try {
        rep.periodicity = check_imaginary_periodicity(model, beta, opts);
    } catch (const std::exception& e) {
        rep.periodicity.detail = e.what();
    }
    try {
        rep.stationarity = check_stationarity(model, opts);
    } catch (const std::exception& e) {
        rep.stationarity.detail = e.what();
    }
    try {
        rep.holomorphicity = check_holomorphicity(model, opts);
    } catch (const std::exception& e) {
        rep.holomorphicity.detail = e.what();
    }
    rep.polynomial = check_polynomial_bound(model, opts);
    rep.gated = falloff_gate_blocks(model);
    if (!rep.gated) {
        if (opts.with_balance) {
            try {
                rep.balance = detailed_balance_gap(model, opts.omega, opts.response);
            } catch (const std::exception&) {
            }
        }
        if (spec) {
            try {
                rep.cond_A = check_condition_A(*spec, opts.omega, opts.ell_ladder, opts);
            } catch (const std::exception& e) {
                rep.cond_A.detail = e.what();
            }
            try {
                rep.cond_B = check_condition_B(model, opts.omega,
                                               opts.response.sigma_ladder.back(),
                                               opts.w_ladder_B, opts);
            } catch (const std::exception& e) {
                rep.cond_B.detail = e.what();
            }
        } else {
            rep.cond_A.verdict = TriState::yes;
            rep.cond_A.detail = "undeformed reference";
            rep.cond_B.verdict = TriState::yes;
            rep.cond_B.detail = "undeformed reference";
        }
    } else {
        rep.cond_A.detail = "refused: interval falloff gate";
        rep.cond_B.detail = "refused: interval falloff gate";
    }
    if (spec) {
        try {
            rep.cond_C = check_condition_C(*spec, opts.ell_ladder, opts);
        } catch (const std::exception& e) {
            rep.cond_C.detail = e.what();
        }
    } else {
        rep.cond_C.verdict = TriState::yes;
        rep.cond_C.detail = "undeformed reference";
    }
    rep.preservation =
        combine_preservation(rep.cond_A.verdict, rep.cond_B.verdict, rep.cond_C.verdict);
    return rep;
}

}  // namespace udw
