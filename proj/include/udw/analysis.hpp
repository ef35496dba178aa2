#pragma once

// Pole-hunting toolkit on rectangles in the complex z plane:
//  - argument-principle winding counts with adaptive contour sampling,
//  - recursive subdivision with a total-variation guard so cells holding a
//    cancelling zero/pole pair (net winding 0) are still split,
//  - Newton polishing z <- z + m f/f' (exact for f = c (z-z0)^-m),
//  - circle-integral residues and principal-part (Laurent) extraction,
//  - pole-trajectory tracking over a descending deformation-scale ladder,
//  - a two-model (power-law vs exponential) growth classifier.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "udw/kinematics.hpp"
#include "udw/numeric.hpp"

namespace udw {

using CFunc = std::function<cplx(cplx)>;

struct Rect {
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;

    [[nodiscard]] double width() const { return re_hi - re_lo; }
    [[nodiscard]] double height() const { return im_hi - im_lo; }
    [[nodiscard]] double diag() const { return std::hypot(width(), height()); }
    [[nodiscard]] cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    [[nodiscard]] bool contains(cplx z) const {
        return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi;
    }
    // Outward expansion, deliberately asymmetric per side so a retry never
    // reproduces the same unlucky contour.
    [[nodiscard]] Rect expanded(double frac) const {
        const double dw = frac * std::max(width(), 1e-12);
        const double dh = frac * std::max(height(), 1e-12);
        return Rect{re_lo - dw, re_hi + 1.37 * dw, im_lo - 0.71 * dh, im_hi + 1.19 * dh};
    }
};

struct WindingResult {
    int winding = 0;               // zeros minus pole orders enclosed
    double total_variation = 0.0;  // sum |d arg f| / 2 pi along the contour
    bool converged = false;
    int samples = 0;
};

namespace detail {

// Phase accumulation along a closed contour given by point_at(j, n) for
// j = 0..n-1.  Samples are normalized to the unit circle; a nonfinite or
// exactly-zero sample marks the level bad (sample positions move with n, so
// the next doubling usually recovers).  Convergence requires every phase
// step below pi/2 and the integer winding stable across one doubling.
template <class PointFn>
WindingResult winding_core(const CFunc& f, PointFn&& point_at, int n_start, int n_cap) {
    WindingResult best;
    long prev_winding = std::numeric_limits<long>::min();
    bool prev_ok = false;
    for (int n = n_start; n <= n_cap; n *= 2) {
        double acc = 0.0, tv = 0.0, max_step = 0.0;
        bool bad = false;
        cplx first{}, prev{};
        for (int j = 0; j <= n; ++j) {
            const int idx = (j == n) ? 0 : j;
            cplx v = (j == n) ? first : f(point_at(idx, n));
            if (j < n) {
                const double m = std::abs(v);
                if (!std::isfinite(m) || m == 0.0) { bad = true; break; }
                v /= m;
            }
            if (j == 0) { first = v; prev = v; continue; }
            const double dphi = std::arg(v * std::conj(prev));
            acc += dphi;
            tv += std::abs(dphi);
            max_step = std::max(max_step, std::abs(dphi));
            prev = v;
        }
        if (!bad) {
            const double turns = acc / (2.0 * kPi);
            const long w = std::lround(turns);
            const bool ok = max_step < 0.5 * kPi && std::abs(turns - double(w)) < 0.25;
            best.winding = int(w);
            best.total_variation = tv / (2.0 * kPi);
            best.samples = n;
            if (ok && prev_ok && w == prev_winding) {
                best.converged = true;
                return best;
            }
            prev_ok = ok;
            prev_winding = w;
        } else {
            prev_ok = false;
        }
    }
    best.converged = false;
    return best;
}

}  // namespace detail

[[nodiscard]] inline WindingResult winding_rect(const CFunc& f, const Rect& r,
                                                int n_start = 64, int n_cap = 1 << 14) {
    // Counterclockwise perimeter, n samples per side at midpoint offsets.
    auto pt = [&r](int j, int n) -> cplx {
        const int s = j / n;
        const double t = (double(j % n) + 0.5) / double(n);
        switch (s) {
            case 0: return {r.re_lo + t * r.width(), r.im_lo};
            case 1: return {r.re_hi, r.im_lo + t * r.height()};
            case 2: return {r.re_hi - t * r.width(), r.im_hi};
            default: return {r.re_lo, r.im_hi - t * r.height()};
        }
    };
    auto wrapped = [&pt](int j, int n4) -> cplx { return pt(j, n4 / 4); };
    return detail::winding_core(f, wrapped, 4 * n_start, 4 * n_cap);
}

[[nodiscard]] inline WindingResult winding_circle(const CFunc& f, cplx c, double r,
                                                  int n_start = 64, int n_cap = 1 << 13) {
    auto pt = [c, r](int j, int n) -> cplx {
        const double th = 2.0 * kPi * (double(j) + 0.5) / double(n);
        return c + r * cplx{std::cos(th), std::sin(th)};
    };
    return detail::winding_core(f, pt, n_start, n_cap);
}

// (1/2 pi i) * contour integral of f over the circle |z - c| = r, by the
// trapezoid rule with sample doubling (geometric convergence for integrands
// analytic in an annulus around the circle).
[[nodiscard]] inline cplx circle_residue_integral(const CFunc& f, cplx c, double r,
                                                  double rel_tol = 1e-10, bool* ok = nullptr,
                                                  int n_start = 64, int n_cap = 1 << 14) {
    cplx prev{std::numeric_limits<double>::quiet_NaN(), 0.0};
    cplx val{};
    bool have_prev = false;
    if (ok) *ok = false;
    for (int n = n_start; n <= n_cap; n *= 2) {
        cplx sum{};
        for (int j = 0; j < n; ++j) {
            const double th = 2.0 * kPi * (double(j) + 0.5) / double(n);
            const cplx e{std::cos(th), std::sin(th)};
            sum += f(c + r * e) * e;
        }
        val = sum * (r / double(n));
        if (!std::isfinite(std::abs(val))) return val;
        if (have_prev) {
            const double scale = std::max({std::abs(val), std::abs(prev), 1e-300});
            if (std::abs(val - prev) <= rel_tol * scale) {
                if (ok) *ok = true;
                return val;
            }
        }
        prev = val;
        have_prev = true;
    }
    return val;
}

// Residue at an isolated pole: circle integral at r0, then halve the radius
// (up to 6 times) until two consecutive radii agree — disagreement flags
// contamination from a neighboring singularity at the larger radius.
[[nodiscard]] inline cplx residue_at(const CFunc& f, cplx z0, double r0,
                                     double rel_tol = 1e-9, bool* converged = nullptr) {
    cplx prev{};
    bool have_prev = false;
    double ref = 1.0;
    if (converged) *converged = false;
    cplx val{};
    double r = r0;
    for (int k = 0; k <= 6; ++k, r *= 0.5) {
        bool ok = false;
        val = circle_residue_integral(f, z0, r, rel_tol, &ok);
        if (!ok || !std::isfinite(std::abs(val))) { have_prev = false; continue; }
        if (!have_prev) ref = std::max(1.0, std::abs(val));
        if (have_prev &&
            std::abs(val - prev) <= std::max(10.0 * rel_tol * std::max(std::abs(val), std::abs(prev)),
                                             1e-13 * ref)) {
            if (converged) *converged = true;
            return val;
        }
        prev = val;
        have_prev = true;
    }
    return val;
}

// Principal part about `center`: coefficients c[k-1] = c_{-k} of
// sum_k c_{-k} (z - center)^{-k}, k = 1..terms, via
// c_{-k} = (r^k / n) sum_j f(z_j) e^{i k th_j}.  All orders share one
// sampling loop; doubling stops when every coefficient is stable.
struct LaurentData {
    cplx center{};
    int terms = 0;
    std::array<cplx, 12> c{};
    double radius = 0.0;
    bool converged = false;
};

[[nodiscard]] inline LaurentData laurent_principal(const CFunc& f, cplx center, double r,
                                                   int terms, double rel_tol = 1e-10,
                                                   int n_start = 128, int n_cap = 1 << 14) {
    LaurentData out;
    out.center = center;
    out.terms = std::min(terms, int(out.c.size()));
    out.radius = r;
    std::array<cplx, 12> prev{};
    bool have_prev = false;
    for (int n = n_start; n <= n_cap; n *= 2) {
        std::array<cplx, 12> acc{};
        bool bad = false;
        for (int j = 0; j < n && !bad; ++j) {
            const double th = 2.0 * kPi * (double(j) + 0.5) / double(n);
            const cplx e{std::cos(th), std::sin(th)};
            const cplx fv = f(center + r * e);
            if (!std::isfinite(std::abs(fv))) { bad = true; break; }
            cplx ek = e;
            for (int k = 0; k < out.terms; ++k) {
                acc[size_t(k)] += fv * ek;
                ek *= e;
            }
        }
        if (bad) { have_prev = false; continue; }
        double rk = r;
        for (int k = 0; k < out.terms; ++k) {
            acc[size_t(k)] *= rk / double(n);
            rk *= r;
        }
        if (have_prev) {
            double cmax = 0.0;
            for (int k = 0; k < out.terms; ++k) cmax = std::max(cmax, std::abs(acc[size_t(k)]));
            bool stable = true;
            for (int k = 0; k < out.terms && stable; ++k) {
                const double scale = std::max(std::abs(acc[size_t(k)]), 1e-10 * std::max(cmax, 1e-300));
                if (std::abs(acc[size_t(k)] - prev[size_t(k)]) > rel_tol * scale) stable = false;
            }
            if (stable) {
                out.c = acc;
                out.converged = true;
                return out;
            }
        }
        prev = acc;
        out.c = acc;
        have_prev = true;
    }
    return out;
}

struct Pole {
    cplx position{};
    int order = 1;            // enclosed winding magnitude at the probe circle
    cplx residue{};
    bool residue_converged = true;
    int cluster_id = -1;      // >= 0 when several candidates merged here
    double iso_radius = 0.0;  // circle radius covering this pole (or whole cluster)
    std::string provenance;   // filled by trackers ("station", "interior", ...)
};

struct PoleScanParams {
    double min_sep = kPi / 4.0;   // smallest pole separation to resolve (floor 1e-4)
    double newton_tol = 1e-11;
    int max_depth = 48;
    double tv_threshold = 0.5;    // subdivide net-zero cells above this
    double residue_rel_tol = 1e-9;
    bool with_residues = true;
    long cell_budget = 500000;
};

namespace detail {

inline bool newton_pole_polish(const CFunc& f, cplx start, int m, double scale,
                               double tol, cplx* out) {
    // Newton on g = 1/f: the pole becomes an order-m zero of an analytic
    // function, so the finite-difference derivative stays accurate arbitrarily
    // close to it (differencing f itself deadlocks once h reaches the
    // distance to the pole).  z <- z - m g/g' is exact for a pure power and
    // repels zeros of f (poles of g).  Restarts from a deterministic jitter
    // ring on failure.
    const auto g = [&f](cplx z) -> cplx {
        const cplx fv = f(z);
        if (!std::isfinite(std::abs(fv))) return cplx{0.0, 0.0};  // on the pole
        return 1.0 / fv;
    };
    // The cell winding that suggested m counts zeros against poles, so m can
    // undershoot the true order; m = 1 converges for every order (linearly)
    // and is kept as a fallback.
    const int mults[2] = {m, 1};
    for (int mi = 0; mi < (m == 1 ? 1 : 2); ++mi)
        for (int attempt = 0; attempt < 9; ++attempt) {
            cplx z = start;
            if (attempt > 0) {
                const double th = 2.0 * kPi * double(attempt - 1) / 8.0 + 0.37;
                z += 0.31 * scale * cplx{std::cos(th), std::sin(th)};
            }
            double h = std::max(1e-13, 1e-3 * scale);
            bool ok = false;
            for (int it = 0; it < 200; ++it) {
                const cplx gp = (g(z + h) - g(z - h)) / (2.0 * h);
                const cplx gv = g(z);
                if (!std::isfinite(std::abs(gv)) || !std::isfinite(std::abs(gp)) ||
                    std::abs(gp) == 0.0) break;
                const cplx step = -double(mults[mi]) * gv / gp;
                if (!std::isfinite(std::abs(step))) break;
                z += step;
                if (std::abs(z - start) > 6.0 * scale + 10.0 * tol) break;
                // g is analytic at the target, so h may track the step all the
                // way down; an order-n zero needs h < |z - pole| or the h^2
                // Taylor term swamps g' and the steps stall.
                h = std::max(1e-13, std::min(h, 0.3 * std::abs(step)));
                if (std::abs(step) < tol * std::max(1.0, std::abs(z))) { ok = true; break; }
            }
            if (ok) { *out = z; return true; }
        }
    return false;
}

struct ScanState {
    const CFunc* f = nullptr;
    PoleScanParams p{};
    std::vector<cplx> candidates;
    std::vector<int> cand_winding;
    long cells = 0;
    bool complete = true;
    bool clipped = false;  // overflow plateaus were pruned from the scan
};

// True when |f| is non-finite across an interior probe grid: the cell is a
// magnitude plateau beyond IEEE range.  An isolated pole cannot hide inside
// one (its neighborhood reaches the pole through finite values), so such
// cells are pruned rather than subdivided; the clip is reported upward.
inline bool cell_overflow_plateau(const CFunc& f, const Rect& r) {
    static constexpr double kX[3] = {0.21, 0.50, 0.79};
    static constexpr double kY[3] = {0.19, 0.50, 0.81};
    for (double fx : kX)
        for (double fy : kY) {
            const cplx z{r.re_lo + r.width() * fx, r.im_lo + r.height() * fy};
            if (std::isfinite(std::abs(f(z)))) return false;
        }
    return true;
}

inline WindingResult winding_rect_retry(const CFunc& f, const Rect& r) {
    static constexpr double kExpand[4] = {0.0, 0.003, 0.0113, 0.0257};
    WindingResult w;
    for (double frac : kExpand) {
        const Rect rr = (frac == 0.0) ? r : r.expanded(frac);
        w = winding_rect(f, rr);
        if (w.converged) return w;
    }
    return w;
}

inline void scan_cell(ScanState& st, const Rect& r, int depth) {
    if (++st.cells > st.p.cell_budget) { st.complete = false; return; }
    const WindingResult w = winding_rect_retry(*st.f, r);
    if (!w.converged && cell_overflow_plateau(*st.f, r)) {
        st.clipped = true;
        return;
    }
    if (!w.converged && depth >= st.p.max_depth) { st.complete = false; return; }
    if (w.converged && w.winding == 0 && w.total_variation <= st.p.tv_threshold) return;
    const bool bottom = r.diag() < 0.25 * st.p.min_sep || depth >= st.p.max_depth;
    if (!bottom) {
        const double rm = 0.5 * (r.re_lo + r.re_hi), im = 0.5 * (r.im_lo + r.im_hi);
        scan_cell(st, Rect{r.re_lo, rm, r.im_lo, im}, depth + 1);
        scan_cell(st, Rect{rm, r.re_hi, r.im_lo, im}, depth + 1);
        scan_cell(st, Rect{r.re_lo, rm, im, r.im_hi}, depth + 1);
        scan_cell(st, Rect{rm, r.re_hi, im, r.im_hi}, depth + 1);
        return;
    }
    if (w.converged && w.winding > 0) return;  // zeros only
    const int m = w.winding < 0 ? -w.winding : 1;
    cplx z0{};
    if (!newton_pole_polish(*st.f, r.center(), m, std::max(r.diag(), 1e-12),
                            st.p.newton_tol, &z0))
        return;
    st.candidates.push_back(z0);
    st.cand_winding.push_back(m);
}

inline int probe_order(const CFunc& f, cplx z0, double r0) {
    double r = r0;
    for (int attempt = 0; attempt < 5; ++attempt, r *= 0.618) {
        const WindingResult w = winding_circle(f, z0, r);
        if (w.converged) return -w.winding;
    }
    return 0;
}

// Residue over a circle that must not shrink (it covers a whole cluster):
// cross-checked against a slightly larger circle instead.
inline cplx cluster_residue(const CFunc& f, cplx c, double r, double r_max,
                            double rel_tol, bool* converged) {
    bool ok1 = false, ok2 = false;
    const cplx v1 = circle_residue_integral(f, c, r, rel_tol, &ok1);
    const double r2 = std::min(1.3 * r, r_max);
    const cplx v2 = circle_residue_integral(f, c, r2, rel_tol, &ok2);
    const double scale = std::max({std::abs(v1), std::abs(v2), 1e-300});
    *converged = ok1 && ok2 && std::abs(v1 - v2) <= 100.0 * rel_tol * scale;
    return v1;
}

}  // namespace detail

// Locate all poles of f inside `region`.  Candidates closer than min_sep/2
// merge into a cluster entry whose order is the circle winding around the
// merged center and whose residue is the cluster total.
[[nodiscard]] inline std::vector<Pole> locate_poles(const CFunc& f, const Rect& region,
                                                    const PoleScanParams& params,
                                                    bool* complete = nullptr,
                                                    bool* clipped = nullptr) {
    detail::ScanState st;
    st.f = &f;
    st.p = params;
    st.p.min_sep = std::max(params.min_sep, 1e-4);
    detail::scan_cell(st, region, 0);
    if (complete) *complete = st.complete;
    if (clipped) *clipped = st.clipped;

    // Deduplicate Newton fixed points, then merge groups within min_sep/2.
    std::vector<size_t> idx(st.candidates.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        const cplx za = st.candidates[a], zb = st.candidates[b];
        if (za.real() != zb.real()) return za.real() < zb.real();
        return za.imag() < zb.imag();
    });
    std::vector<std::vector<cplx>> groups;
    for (size_t i : idx) {
        const cplx z = st.candidates[i];
        bool placed = false;
        for (auto& g : groups) {
            cplx mean{};
            for (cplx m : g) mean += m;
            mean /= double(g.size());
            if (std::abs(z - mean) < 0.5 * st.p.min_sep) {
                g.push_back(z);
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({z});
    }

    std::vector<Pole> out;
    int next_cluster = 0;
    for (const auto& g : groups) {
        cplx mean{};
        for (cplx m : g) mean += m;
        mean /= double(g.size());
        if (!region.contains(mean)) continue;
        double spread = 0.0;
        for (cplx m : g) spread = std::max(spread, std::abs(m - mean));
        Pole p;
        p.position = mean;
        p.iso_radius = std::max(0.25 * st.p.min_sep, 2.0 * spread);
        p.cluster_id = (g.size() > 1) ? next_cluster++ : -1;
        p.order = detail::probe_order(f, mean, p.iso_radius);
        if (p.order <= 0) continue;  // regular point or zero
        out.push_back(p);
    }
    // Keep every circle clear of its neighbors before integrating.
    for (size_t i = 0; i < out.size(); ++i)
        for (size_t j = 0; j < out.size(); ++j)
            if (i != j)
                out[i].iso_radius = std::min(
                    out[i].iso_radius, 0.45 * std::abs(out[i].position - out[j].position));
    if (st.p.with_residues)
        for (Pole& p : out) {
            if (p.cluster_id >= 0)
                p.residue = detail::cluster_residue(f, p.position, p.iso_radius,
                                                    2.0 * p.iso_radius, st.p.residue_rel_tol,
                                                    &p.residue_converged);
            else
                p.residue = residue_at(f, p.position, p.iso_radius, st.p.residue_rel_tol,
                                       &p.residue_converged);
        }
    std::sort(out.begin(), out.end(), [](const Pole& a, const Pole& b) {
        if (a.position.real() != b.position.real()) return a.position.real() < b.position.real();
        return a.position.imag() < b.position.imag();
    });
    return out;
}

// Re-polish a known pole set after a small parameter step (Newton warm start).
// Fails — returns false — if any start diverges, wanders by more than
// min_sep/2, collides with another refined pole, or changes order.
[[nodiscard]] inline bool refine_pole_set(const CFunc& f, const std::vector<Pole>& warm,
                                          const Rect& region, const PoleScanParams& params,
                                          std::vector<Pole>* out) {
    out->clear();
    const double min_sep = std::max(params.min_sep, 1e-4);
    for (const Pole& wp : warm) {
        cplx z0 = wp.position;
        if (wp.cluster_id < 0) {
            // A merged cluster has no Newton fixed point; keep its center and
            // let the order probe below validate that the content is intact.
            if (!detail::newton_pole_polish(f, wp.position, wp.order, 0.5 * min_sep,
                                            params.newton_tol, &z0))
                return false;
            if (std::abs(z0 - wp.position) > 0.5 * min_sep) return false;
        }
        if (!region.contains(z0)) return false;
        for (const Pole& done : *out)
            if (std::abs(z0 - done.position) < 0.5 * min_sep) return false;
        Pole p = wp;
        p.position = z0;
        if (p.iso_radius <= 0.0) p.iso_radius = 0.25 * min_sep;
        const int order = detail::probe_order(f, z0, p.iso_radius);
        if (order != wp.order) return false;
        if (params.with_residues) {
            if (p.cluster_id >= 0)
                p.residue = detail::cluster_residue(f, z0, p.iso_radius, 2.0 * p.iso_radius,
                                                    params.residue_rel_tol, &p.residue_converged);
            else
                p.residue = residue_at(f, z0, p.iso_radius, params.residue_rel_tol,
                                       &p.residue_converged);
        }
        out->push_back(p);
    }
    return true;
}

// ---------------------------------------------------------------------------
// Trajectory tracking over a descending scale ladder.

struct TrackParams {
    std::vector<double> ladder;     // descending scales
    double ratio_threshold = 0.75;  // successive-step ratio accepted as geometric
    double match_cap = 0.35;        // max displacement matched across one rung
    int max_refine_rounds = 4;
};

struct PoleTrajectory {
    std::vector<double> scales;
    std::vector<Pole> poles;
    cplx limit{};          // extrapolated scale -> 0 position
    double limit_err = 0;  // |3-point minus 2-point extrapolant|
    bool limit_ok = false;
    double worst_ratio = 0.0;
};

struct TrackResult {
    std::vector<PoleTrajectory> trajectories;
    std::vector<double> ladder_used;
    std::vector<std::string> events;
    bool refined_out = true;  // false if ratios stayed non-geometric after refinement
};

namespace detail {

inline void build_trajectories(const std::vector<double>& ladder,
                               const std::map<double, std::vector<Pole>, std::greater<double>>& rungs,
                               double match_cap, TrackResult* out) {
    out->trajectories.clear();
    out->events.clear();
    std::vector<PoleTrajectory> open;
    for (double ell : ladder) {
        const auto& poles = rungs.at(ell);
        std::vector<char> pole_used(poles.size(), 0), traj_used(open.size(), 0);
        struct Cand { double d; size_t t, p; };
        std::vector<Cand> cands;
        for (size_t t = 0; t < open.size(); ++t)
            for (size_t p = 0; p < poles.size(); ++p) {
                const double d = std::abs(poles[p].position - open[t].poles.back().position);
                if (d <= match_cap) cands.push_back({d, t, p});
            }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.d != b.d) return a.d < b.d;
            if (a.t != b.t) return a.t < b.t;
            return a.p < b.p;
        });
        for (const Cand& c : cands) {
            if (traj_used[c.t] || pole_used[c.p]) continue;
            traj_used[c.t] = pole_used[c.p] = 1;
            open[c.t].scales.push_back(ell);
            open[c.t].poles.push_back(poles[c.p]);
        }
        for (size_t p = 0; p < poles.size(); ++p) {
            if (pole_used[p]) continue;
            PoleTrajectory t;
            t.scales.push_back(ell);
            t.poles.push_back(poles[p]);
            open.push_back(std::move(t));
            if (ell != ladder.front())
                out->events.push_back("pole appeared at scale " + format_g17(ell));
        }
    }
    for (auto& t : open) {
        if (t.scales.back() != ladder.back())
            out->events.push_back("trajectory ended after scale " + format_g17(t.scales.back()));
        out->trajectories.push_back(std::move(t));
    }
    std::sort(out->trajectories.begin(), out->trajectories.end(),
              [](const PoleTrajectory& a, const PoleTrajectory& b) {
                  const cplx za = a.poles.front().position, zb = b.poles.front().position;
                  if (za.real() != zb.real()) return za.real() < zb.real();
                  return za.imag() < zb.imag();
              });
}

inline void finish_trajectory(PoleTrajectory* t, double ratio_threshold) {
    const size_t n = t->scales.size();
    t->worst_ratio = 0.0;
    if (n >= 3) {
        for (size_t k = 2; k < n; ++k) {
            const double d1 = std::abs(t->poles[k].position - t->poles[k - 1].position);
            const double d0 = std::abs(t->poles[k - 1].position - t->poles[k - 2].position);
            // floor sits above the polisher's jitter so fixed poles read as
            // geometric instead of producing 0/0 noise ratios
            if (d0 > 1e-9 && d1 > 1e-9) t->worst_ratio = std::max(t->worst_ratio, d1 / d0);
        }
    }
    if (n >= 2) {
        std::vector<double> xs;
        std::vector<cplx> ys;
        const size_t take = std::min<size_t>(3, n);
        for (size_t k = n - take; k < n; ++k) {
            xs.push_back(t->scales[k]);
            ys.push_back(t->poles[k].position);
        }
        t->limit = lagrange_zero(xs, ys);
        if (take == 3) {
            const cplx two = lagrange_zero(std::vector<double>{xs[1], xs[2]},
                                           std::vector<cplx>{ys[1], ys[2]});
            t->limit_err = std::abs(t->limit - two);
        } else {
            t->limit_err = std::abs(t->limit - t->poles.back().position);
        }
        t->limit_ok = (n >= 3) && (t->worst_ratio < ratio_threshold || t->worst_ratio == 0.0);
    } else {
        t->limit = t->poles.back().position;
        t->limit_err = std::numeric_limits<double>::infinity();
        t->limit_ok = false;
    }
}

}  // namespace detail

// scan(ell) must return the pole set at that scale (deterministic).  If any
// trajectory's successive displacements fail the geometric-ratio test, the
// ladder is refined with geometric midpoints, up to max_refine_rounds.
template <class ScanFn>
[[nodiscard]] TrackResult track_poles(ScanFn&& scan, const TrackParams& params) {
    TrackResult out;
    std::vector<double> ladder = params.ladder;
    std::sort(ladder.begin(), ladder.end(), std::greater<double>());
    ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
    std::map<double, std::vector<Pole>, std::greater<double>> rungs;
    for (int round = 0;; ++round) {
        for (double ell : ladder)
            if (!rungs.count(ell)) rungs[ell] = scan(ell);
        detail::build_trajectories(ladder, rungs, params.match_cap, &out);
        double worst = 0.0;
        for (auto& t : out.trajectories) {
            detail::finish_trajectory(&t, params.ratio_threshold);
            worst = std::max(worst, t.worst_ratio);
        }
        out.ladder_used = ladder;
        if (worst < params.ratio_threshold || round >= params.max_refine_rounds) {
            out.refined_out = worst < params.ratio_threshold;
            if (round > 0)
                out.events.push_back("ladder refined " + std::to_string(round) + " round(s)");
            return out;
        }
        std::vector<double> refined;
        for (size_t i = 0; i + 1 < ladder.size(); ++i) {
            refined.push_back(ladder[i]);
            refined.push_back(std::sqrt(ladder[i] * ladder[i + 1]));
        }
        refined.push_back(ladder.back());
        ladder = std::move(refined);
    }
}

// ---------------------------------------------------------------------------
// Growth classification along a ray: fit log|v| against log x (power law)
// and against x (exponential); the exponential verdict needs a positive rate
// and a 10x better RMS residual than the power-law model.  Overflow at any
// probe is conclusive on its own.

enum class GrowthClass { bounded, power_law, exponential };

struct GrowthFit {
    GrowthClass cls = GrowthClass::bounded;
    double power = 0.0;
    double rate = 0.0;
    double rms_power = 0.0;
    double rms_exp = 0.0;
    bool overflow = false;
};

[[nodiscard]] inline GrowthFit classify_growth(const std::vector<double>& xs,
                                               const std::vector<double>& mags) {
    GrowthFit g;
    std::vector<double> lx, x, ly;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(mags[i])) {
            g.cls = GrowthClass::exponential;
            g.overflow = true;
            return g;
        }
        x.push_back(xs[i]);
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(std::max(mags[i], 1e-300)));
    }
    if (x.size() < 2) return g;
    const LineFit fp = linear_fit(lx, ly);
    const LineFit fe = linear_fit(x, ly);
    g.power = fp.slope;
    g.rate = fe.slope;
    g.rms_power = fp.rms_residual;
    g.rms_exp = fe.rms_residual;
    if (g.rate > 0.0 && g.rms_power > 10.0 * g.rms_exp)
        g.cls = GrowthClass::exponential;
    else if (g.power > 0.1)
        g.cls = GrowthClass::power_law;
    else
        g.cls = GrowthClass::bounded;
    return g;
}

// ---------------------------------------------------------------------------
// Strip geometry helpers.

// Regulated undeformed pole rows z = i eps_z + 2 pi i k / a restricted to
// Im z in [im_lo, im_hi].
[[nodiscard]] inline std::vector<cplx> stations_in(const Accel& acc, const RegulatorPolicy& reg,
                                                   double im_lo, double im_hi) {
    std::vector<cplx> s;
    const double step = 2.0 * kPi / acc.a;
    for (int k = -3; k <= 5; ++k) {
        const double im = reg.eps_z + double(k) * step;
        if (im >= im_lo && im <= im_hi) s.push_back(cplx{0.0, im});
    }
    return s;
}

// Scan rectangle: the closed strip plus a half-station margin on each side.
// Offsets are irrational-looking on purpose: subdivision midlines must not
// land on the pole rows Im z = eps, 2 pi/a + eps, ... (every catalog
// denominator vanishes only at |Re z| < 2 asinh(scale/2) + eps, so a small
// re_half suffices for scales below ~1).
[[nodiscard]] inline Rect default_scan_region(const Accel& acc, double re_half = 2.07) {
    const double inv_a = 1.0 / acc.a;
    const double m = 0.5 * kPi * inv_a;
    return Rect{-re_half - 0.0423 * inv_a, re_half + 0.0117 * inv_a,
                -m - 0.0323 * inv_a, strip_height(acc) + m + 0.0571 * inv_a};
}

}  // namespace udw
