#pragma once

// Shared numeric utilities: deterministic formatting/hashing, extrapolation,
// least-squares fits, Gauss-Hermite rules, and an adaptive Gauss-Kronrod
// integrator for complex-valued integrands on real intervals.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace udw {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// formatting / hashing

// All floating-point output carries 17 significant digits so payloads
// round-trip exactly (regression comparisons are byte-level).
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// extrapolation / fitting

// Lagrange extrapolation of (x_i, y_i) to x = 0.  Used for the eps ladder
// (linear, 2 points) and the sigma ladder (3 points in the variable 1/sigma^2).
template <class T>
T lagrange_zero(const std::vector<double>& xs, const std::vector<T>& ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("lagrange_zero: bad inputs");
    T total{};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double L = 1.0;
        for (std::size_t j = 0; j < xs.size(); ++j)
            if (j != i) L *= (0.0 - xs[j]) / (xs[i] - xs[j]);
        total += ys[i] * L;
    }
    return total;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

inline LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit: bad inputs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite rule:  integral e^{-u^2} f(u) du  ~=  sum w_i f(x_i)

struct GaussHermite {
    std::vector<double> x;  // nodes, ascending
    std::vector<double> w;
};

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix (zero
// diagonal, off-diagonal sqrt(k/2)), weights sqrt(pi) times the squared
// first eigenvector components.  Implicit-shift QL on the tridiagonal is
// stable at any order, unlike Newton on the Hermite recurrence whose
// asymptotic seeds collapse for rules past a few hundred nodes.
inline GaussHermite gauss_hermite(int n) {
    static std::mutex mu;
    static std::map<int, GaussHermite> cache;
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
    }
    std::vector<double> d(n, 0.0), e(n, 0.0), q(n, 0.0);
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(0.5 * k);
    q[0] = 1.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0, m = l;
        do {
            for (m = l; m < n - 1; ++m)
                if (std::abs(e[m]) <= eps * (std::abs(d[m]) + std::abs(d[m + 1]))) break;
            if (m != l) {
                if (iter++ == 60)
                    throw std::runtime_error("gauss_hermite: QL did not converge at n=" +
                                             std::to_string(n));
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = q[i + 1];
                    q[i + 1] = s * q[i] + c * f;
                    q[i] = c * q[i] - s * f;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    GaussHermite r;
    r.x = d;
    r.w.assign(n, 0.0);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    for (int i = 0; i < n; ++i) {
        r.x[i] = d[idx[i]];
        r.w[i] = std::sqrt(kPi) * q[idx[i]] * q[idx[i]];
    }
    std::lock_guard<std::mutex> lk(mu);
    cache[n] = r;
    return r;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (G7/K15) quadrature for complex integrands

namespace detail {
// 15-point Kronrod abscissae (positive half) and weights; Gauss-7 weights.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace detail

struct QuadResult {
    cplx value{0.0, 0.0};
    double abs_error = 0.0;
    bool converged = false;
    bool min_width_hit = false;  // refinement bottomed out on panel width
    bool nonfinite = false;      // integrand produced inf/nan
    std::size_t evaluations = 0;
};

template <class F>
std::pair<cplx, double> g7k15_panel(F&& f, double a, double b, bool& nonfinite) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx k15{0, 0}, g7{0, 0};
    for (int i = 0; i < 8; ++i) {
        cplx fv;
        if (i == 7) {
            fv = f(c);
        } else {
            fv = f(c - h * detail::kXgk[i]) + f(c + h * detail::kXgk[i]);
        }
        if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag())) nonfinite = true;
        k15 += detail::kWgk[i] * fv;
        if (i % 2 == 1) g7 += detail::kWg[i / 2] * fv;
    }
    k15 *= h;
    g7 *= h;
    return {k15, std::abs(k15 - g7)};
}

// Integrates f over the union of [seeds[i], seeds[i+1]], refining the
// worst-error panel until the total error estimate meets rel_tol or a panel
// would shrink below min_width.  Final accumulation runs in left-endpoint
// order so the result is independent of refinement history details.
template <class F>
QuadResult adaptive_quad(F&& f, std::vector<double> seeds, double rel_tol,
                         double min_width, std::size_t max_panels = 20000) {
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    struct Panel {
        double a, b;
        cplx val;
        double err;
    };
    QuadResult out;
    std::vector<Panel> panels;
    bool nonfinite = false;
    for (std::size_t i = 0; i + 1 < seeds.size(); ++i) {
        auto [v, e] = g7k15_panel(f, seeds[i], seeds[i + 1], nonfinite);
        out.evaluations += 15;
        panels.push_back({seeds[i], seeds[i + 1], v, e});
    }
    auto totals = [&] {
        cplx v{0, 0};
        double e = 0;
        for (const auto& p : panels) {
            v += p.val;
            e += p.err;
        }
        return std::pair<cplx, double>(v, e);
    };
    while (!nonfinite) {
        auto [tv, te] = totals();
        const double scale = std::max(std::abs(tv), 1e-300);
        if (te <= rel_tol * scale) {
            out.converged = true;
            break;
        }
        // deterministic worst-panel pick: error first, left endpoint tie-break
        std::size_t worst = 0;
        for (std::size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err ||
                (panels[i].err == panels[worst].err && panels[i].a < panels[worst].a))
                worst = i;
        const Panel p = panels[worst];
        if (p.b - p.a < min_width || panels.size() >= max_panels) {
            out.min_width_hit = (p.b - p.a < min_width);
            break;
        }
        const double mid = 0.5 * (p.a + p.b);
        auto [v1, e1] = g7k15_panel(f, p.a, mid, nonfinite);
        auto [v2, e2] = g7k15_panel(f, mid, p.b, nonfinite);
        out.evaluations += 30;
        panels[worst] = {p.a, mid, v1, e1};
        panels.push_back({mid, p.b, v2, e2});
    }
    std::sort(panels.begin(), panels.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    cplx v{0, 0};
    double e = 0;
    for (const auto& p : panels) {
        v += p.val;
        e += p.err;
    }
    out.value = v;
    out.abs_error = e;
    out.nonfinite = nonfinite;
    if (nonfinite) out.converged = false;
    return out;
}

// ---------------------------------------------------------------------------
// bounded worker pool over an index range; callers write results into
// pre-sized slots, so output order never depends on the worker count

template <class F>
void parallel_for(std::size_t n, int workers, F&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t k = std::min<std::size_t>(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (std::size_t t = 0; t < k; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace udw
