#include "astrosyn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

namespace astrosyn {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 to_vec(const AstrocyteDerivative& d) { return {d.x1, d.x2, d.x3}; }

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

bool in_orthant(const AstrocyteState& x) { return x.x1 >= 0.0 && x.x2 >= 0.0 && x.x3 >= 0.0; }

// Gaussian elimination with partial pivoting; returns false for a singular matrix.
bool solve3(Matrix3 a, Vec3 b, Vec3& out)
{
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * out[c];
        out[r] = s / a[r][r];
    }
    return true;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

using cplx = std::complex<double>;
using CVec3 = std::array<cplx, 3>;

CVec3 cross(const CVec3& a, const CVec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double cnorm(const CVec3& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2])); }

// Newton polish of a root of the monic cubic x^3 + a x^2 + b x + c.
cplx polish_root(cplx x, double a, double b, double c)
{
    for (int i = 0; i < 8; ++i) {
        const cplx f = ((x + a) * x + b) * x + c;
        const cplx df = (3.0 * x + 2.0 * a) * x + b;
        if (std::abs(df) < 1e-300) break;
        const cplx next = x - f / df;
        const cplx f_next = ((next + a) * next + b) * next + c;
        if (!(std::abs(f_next) < std::abs(f))) break;
        x = next;
    }
    return x;
}

} // namespace

AstrocyteRhs default_astrocyte_rhs(const AstrocyteParams& p)
{
    return [p](const AstrocyteState& x, double u) { return astrocyte_derivative(x, u, p); };
}

double residual_norm(const AstrocyteParams& p, const AstrocyteState& x, double u)
{
    return norm(to_vec(astrocyte_derivative(x, u, p)));
}

Matrix3 jacobian(const AstrocyteParams& p, const AstrocyteState& x, double u)
{
    static constexpr const char* kNames[3] = {"x1", "x2", "x3"};
    Matrix3 j{};
    const Vec3 base = x.as_array();
    for (std::size_t col = 0; col < 3; ++col) {
        const double h = std::max(1e-6, 1e-6 * std::abs(base[col]));
        Vec3 plus = base;
        Vec3 minus = base;
        plus[col] += h;
        minus[col] -= h;
        const Vec3 fp = to_vec(astrocyte_derivative(AstrocyteState::from(plus), u, p));
        const Vec3 fm = to_vec(astrocyte_derivative(AstrocyteState::from(minus), u, p));
        for (std::size_t row = 0; row < 3; ++row) {
            j[row][col] = (fp[row] - fm[row]) / (2.0 * h);
            if (!std::isfinite(j[row][col])) {
                throw std::domain_error(std::string("jacobian: non-finite derivative with respect to ")
                                        + kNames[col]);
            }
        }
    }
    return j;
}

AstrocyteState find_equilibrium(const AstrocyteParams& p, double u, const AstrocyteState& guess,
                                const EquilibriumOptions& options)
{
    if (!in_orthant(guess)) {
        throw std::invalid_argument("find_equilibrium: guess must lie in the nonnegative orthant");
    }

    double best = std::numeric_limits<double>::infinity();

    const auto newton = [&](AstrocyteState x) -> std::optional<AstrocyteState> {
        double r = residual_norm(p, x, u);
        best = std::min(best, r);
        for (int it = 0; it < options.max_iterations; ++it) {
            if (r < options.tolerance) {
                return x;
            }
            const Matrix3 j = jacobian(p, x, u);
            const Vec3 f = to_vec(astrocyte_derivative(x, u, p));
            Vec3 delta{};
            if (!solve3(j, {-f[0], -f[1], -f[2]}, delta)) {
                return std::nullopt;
            }
            bool accepted = false;
            for (double lambda = 1.0; lambda > 1e-8; lambda *= 0.5) {
                const AstrocyteState trial{x.x1 + lambda * delta[0], x.x2 + lambda * delta[1],
                                           x.x3 + lambda * delta[2]};
                if (!in_orthant(trial)) continue;
                const double rt = residual_norm(p, trial, u);
                if (rt < r) {
                    x = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            best = std::min(best, r);
            if (!accepted) {
                return r < options.tolerance ? std::optional(x) : std::nullopt;
            }
        }
        return r < options.tolerance ? std::optional(x) : std::nullopt;
    };

    if (auto x = newton(guess)) {
        return *x;
    }

    const auto run = integrate_astrocyte(default_astrocyte_rhs(p), guess, [u](double) { return u; },
                                         options.fallback_horizon, options.fallback_dt,
                                         step_count(options.fallback_horizon, options.fallback_dt));
    if (auto x = newton(run.states.back())) {
        return *x;
    }
    throw ConvergenceError("find_equilibrium: no convergence (best residual " + std::to_string(best) + ")", best);
}

Eigenvalues eigenvalues(const Matrix3& m)
{
    // Characteristic polynomial lambda^3 + a lambda^2 + b lambda + c.
    const double trace = m[0][0] + m[1][1] + m[2][2];
    const double minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
                          + m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                       - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                       + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    const double a = -trace;
    const double b = minors;
    const double c = -det;

    // Depressed cubic t^3 + P t + Q with lambda = t - a/3.
    const double shift = a / 3.0;
    const double P = b - a * a / 3.0;
    const double Q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = Q * Q / 4.0 + P * P * P / 27.0;

    Eigenvalues out{};
    const double scale = std::max({1.0, std::abs(a), std::sqrt(std::abs(b)), std::cbrt(std::abs(c))});
    if (disc > 1e-14 * std::pow(scale, 6)) {
        const double sq = std::sqrt(disc);
        const double t = std::cbrt(-Q / 2.0 + sq) + std::cbrt(-Q / 2.0 - sq);
        const double r = polish_root(cplx(t - shift), a, b, c).real();
        // Deflate: (lambda - r)(lambda^2 + pq lambda + qq).
        const double pq = a + r;
        const double qq = b + r * pq;
        const cplx root = std::sqrt(cplx(pq * pq / 4.0 - qq));
        out = {cplx(r), polish_root(-pq / 2.0 + root, a, b, c), polish_root(-pq / 2.0 - root, a, b, c)};
    } else if (P < 0.0) {
        const double rho = 2.0 * std::sqrt(-P / 3.0);
        const double arg = std::clamp(3.0 * Q / (2.0 * P) * std::sqrt(-3.0 / P), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const double t = rho * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);
            out[k] = cplx(polish_root(cplx(t - shift), a, b, c).real());
        }
    } else {
        // Triple root.
        out = {cplx(-shift), cplx(-shift), cplx(-shift)};
    }

    std::sort(out.begin(), out.end(), [](const cplx& l, const cplx& r) {
        if (l.real() != r.real()) return l.real() < r.real();
        return l.imag() < r.imag();
    });
    return out;
}

double eigen_residual(const Matrix3& m, const Eigenvalues& lambdas)
{
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale += v * v;
    scale = std::max(1.0, std::sqrt(scale));

    double worst = 0.0;
    for (const cplx& lambda : lambdas) {
        std::array<CVec3, 3> rows{};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rows[r][c] = cplx(m[r][c]) - (r == c ? lambda : cplx(0.0));

        // Null vector of (m - lambda I): largest cross product of two rows.
        CVec3 v{};
        double best = -1.0;
        for (int i = 0; i < 3; ++i) {
            for (int k = i + 1; k < 3; ++k) {
                const CVec3 cand = cross(rows[i], rows[k]);
                const double n = cnorm(cand);
                if (n > best) {
                    best = n;
                    v = cand;
                }
            }
        }
        if (best < 1e-12 * scale * scale) {
            // Rank <= 1: any vector orthogonal to the dominant row.
            int dom = 0;
            for (int i = 1; i < 3; ++i)
                if (cnorm(rows[i]) > cnorm(rows[dom])) dom = i;
            if (cnorm(rows[dom]) < 1e-12 * scale) continue;
            double best_e = -1.0;
            for (int e = 0; e < 3; ++e) {
                CVec3 unit{};
                unit[e] = 1.0;
                const CVec3 cand = cross(rows[dom], unit);
                if (cnorm(cand) > best_e) {
                    best_e = cnorm(cand);
                    v = cand;
                }
            }
        }
        const double vn = cnorm(v);
        CVec3 mv{};
        for (int r = 0; r < 3; ++r) {
            mv[r] = rows[r][0] * v[0] + rows[r][1] * v[1] + rows[r][2] * v[2];
        }
        worst = std::max(worst, cnorm(mv) / vn / scale);
    }
    return worst;
}

BoundTriple ultimate_bound(const AstrocyteParams& p, double a_glu)
{
    BoundTriple b;
    b.mu1 = p.ip3_star + p.tau_ip3 * (p.v4 + a_glu);
    b.mu2 = (p.v6 + p.c0 * (p.v1 - p.v2)) / (p.k1 + p.v2 * (1.0 + p.c1));
    b.x3_max = 1.0;
    return b;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ trial);
}

InputTrace random_input_trace(std::uint64_t seed, double a_glu, double segment, double horizon)
{
    if (!(segment > 0.0)) {
        throw std::invalid_argument("random_input_trace: segment must be positive");
    }
    const auto n = static_cast<std::size_t>(std::ceil(horizon / segment)) + 1;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, a_glu);
    std::vector<double> values(n);
    for (auto& v : values) v = dist(rng);
    return [values = std::move(values), segment](double t) {
        const auto idx = static_cast<std::size_t>(std::max(0.0, t) / segment);
        return values[std::min(idx, values.size() - 1)];
    };
}

AstrocyteRun integrate_astrocyte(const AstrocyteRhs& rhs, const AstrocyteState& x0, const InputTrace& u,
                                 double horizon, double dt, std::size_t stride)
{
    if (stride == 0) throw std::invalid_argument("integrate_astrocyte: stride must be >= 1");
    const std::size_t steps = step_count(horizon, dt);
    AstrocyteRun run;
    run.times.push_back(0.0);
    run.states.push_back(x0);

    std::array<double, 3> x = x0.as_array();
    Rk4Workspace ws(3);
    double u_now = 0.0;
    auto f = [&](double, std::span<const double> s, std::span<double> ds) {
        const auto d = rhs(AstrocyteState::from(s), u_now);
        ds[0] = d.x1;
        ds[1] = d.x2;
        ds[2] = d.x3;
    };
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        u_now = u(t);
        ws.step(std::span<double>(x), f, t, dt);
        if ((k + 1) % stride == 0 || k + 1 == steps) {
            run.times.push_back(static_cast<double>(k + 1) * dt);
            run.states.push_back(AstrocyteState::from(x));
        }
    }
    return run;
}

namespace {

constexpr std::uint64_t kPositivityStream = 0x706f73; // "pos"
constexpr std::uint64_t kBoundStream = 0x626e64;      // "bnd"
constexpr std::uint64_t kInputStream = 0x696e70;      // "inp"

void require_state(const AstrocyteState& x)
{
    if (!in_orthant(x) || x.x3 > 1.0 || !std::isfinite(x.x1) || !std::isfinite(x.x2)) {
        throw std::invalid_argument("initial astrocyte state must lie in the nonnegative orthant with x3 in [0, 1]");
    }
}

// Scans one run for negative excursions; updates the verdict in place.
void scan_positivity(const AstrocyteRun& run, const AstrocyteState& x0, std::size_t trial, double tolerance,
                     PositivityVerdict& v)
{
    for (std::size_t i = 0; i < run.states.size(); ++i) {
        const auto& s = run.states[i];
        const double lo = std::min({s.x1, s.x2, s.x3});
        v.min_value = std::min(v.min_value, lo);
        if (lo < -tolerance && v.pass) {
            v.pass = false;
            v.counterexample_initial = x0;
            v.counterexample_time = run.times[i];
            v.counterexample_trial = trial;
        }
    }
}

} // namespace

PositivityVerdict check_positivity_from(const AstrocyteParams& p, const AstrocyteState& x0, const InputTrace& u,
                                        PropertyCheckOptions options)
{
    require_state(x0);
    const AstrocyteRhs rhs = options.rhs ? options.rhs : default_astrocyte_rhs(p);
    PositivityVerdict v;
    v.trials = 1;
    v.min_value = std::min({x0.x1, x0.x2, x0.x3});
    scan_positivity(integrate_astrocyte(rhs, x0, u, options.horizon, options.dt), x0, 0, options.tolerance, v);
    return v;
}

PositivityVerdict check_positivity(const AstrocyteParams& p, const InputTrace& u_profile, std::size_t n_trials,
                                   std::uint64_t seed, PropertyCheckOptions options)
{
    if (n_trials == 0) throw std::invalid_argument("check_positivity: n_trials must be >= 1");
    validate(p);
    const AstrocyteRhs rhs = options.rhs ? options.rhs : default_astrocyte_rhs(p);
    const BoundTriple bound = ultimate_bound(p, p.a_glu);

    PositivityVerdict v;
    v.trials = n_trials;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        std::mt19937_64 rng(derive_seed(seed, kPositivityStream, trial));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const AstrocyteState x0{2.0 * bound.mu1 * unit(rng), 2.0 * bound.mu2 * unit(rng), unit(rng)};
        const InputTrace u = u_profile ? u_profile
                                       : random_input_trace(derive_seed(seed, kInputStream, trial), p.a_glu,
                                                            options.input_segment, options.horizon);
        v.min_value = std::min({v.min_value, x0.x1, x0.x2, x0.x3});
        scan_positivity(integrate_astrocyte(rhs, x0, u, options.horizon, options.dt), x0, trial, options.tolerance,
                        v);
    }
    return v;
}

namespace {

double excursion(const AstrocyteState& s, const BoundTriple& b)
{
    const double e1 = std::max({0.0, -s.x1, s.x1 - b.mu1});
    const double e2 = std::max({0.0, -s.x2, s.x2 - b.mu2});
    const double e3 = std::max({0.0, -s.x3, s.x3 - b.x3_max});
    return std::max({e1, e2, e3});
}

void scan_boundedness(const AstrocyteRun& run, const BoundTriple& bound, const BoundednessOptions& o,
                      const AstrocyteState& x0, std::size_t trial, BoundednessVerdict& v)
{
    const double window_start = o.horizon * (1.0 - o.settle_fraction);
    double settle = 0.0;
    double overshoot = 0.0;
    for (std::size_t i = 0; i < run.states.size(); ++i) {
        const double e = excursion(run.states[i], bound);
        if (e > o.slack) {
            settle = i + 1 < run.times.size() ? run.times[i + 1] : run.times[i];
            if (run.times[i] >= window_start) overshoot = std::max(overshoot, e);
        }
    }
    v.worst_settle_time = std::max(v.worst_settle_time, settle);
    v.worst_overshoot = std::max(v.worst_overshoot, overshoot);
    if (settle > window_start && v.pass) {
        v.pass = false;
        v.counterexample_initial = x0;
        v.counterexample_trial = trial;
    }
}

} // namespace

BoundednessVerdict check_ultimate_boundedness_from(const AstrocyteParams& p, double a_glu,
                                                   const AstrocyteState& x0, const InputTrace& u,
                                                   BoundednessOptions options)
{
    require_state(x0);
    const AstrocyteRhs rhs = options.rhs ? options.rhs : default_astrocyte_rhs(p);
    const BoundTriple bound = ultimate_bound(p, a_glu);
    BoundednessVerdict v;
    v.trials = 1;
    scan_boundedness(integrate_astrocyte(rhs, x0, u, options.horizon, options.dt), bound, options, x0, 0, v);
    return v;
}

BoundednessVerdict check_ultimate_boundedness(const AstrocyteParams& p, double a_glu, std::size_t n_trials,
                                              std::uint64_t seed, BoundednessOptions options)
{
    if (n_trials == 0) throw std::invalid_argument("check_ultimate_boundedness: n_trials must be >= 1");
    validate(p);
    const AstrocyteRhs rhs = options.rhs ? options.rhs : default_astrocyte_rhs(p);
    const BoundTriple bound = ultimate_bound(p, a_glu);

    BoundednessVerdict v;
    v.trials = n_trials;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        std::mt19937_64 rng(derive_seed(seed, kBoundStream, trial));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const AstrocyteState x0{options.initial_scale * bound.mu1 * unit(rng),
                                options.initial_scale * bound.mu2 * unit(rng), unit(rng)};
        const InputTrace u = random_input_trace(derive_seed(seed, kInputStream, trial), a_glu,
                                                options.input_segment, options.horizon);
        scan_boundedness(integrate_astrocyte(rhs, x0, u, options.horizon, options.dt), bound, options, x0, trial, v);
    }
    return v;
}

StabilityReport stability_report(const AstrocyteParams& p, double u, const AstrocyteState& guess,
                                 const ReportOptions& options)
{
    StabilityReport r;
    r.input_level = u;
    r.equilibrium = find_equilibrium(p, u, guess);
    r.residual = residual_norm(p, r.equilibrium, u);
    r.jacobian = jacobian(p, r.equilibrium, u);
    r.eigenvalues = eigenvalues(r.jacobian);
    r.eigen_residual = eigen_residual(r.jacobian, r.eigenvalues);
    r.bound = ultimate_bound(p, p.a_glu);
    r.locally_stable = std::all_of(r.eigenvalues.begin(), r.eigenvalues.end(),
                                   [](const std::complex<double>& l) { return l.real() < 0.0; });
    r.positivity = check_positivity(p, {}, options.n_trials, options.seed);
    r.boundedness = check_ultimate_boundedness(p, p.a_glu, options.n_trials, options.seed);
    return r;
}

} // namespace astrosyn
