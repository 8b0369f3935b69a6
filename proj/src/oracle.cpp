#include "lpk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <lapacke.h>

#include "lpk/quadrature.hpp"

namespace lpk {

int RadialDiscretization::interior_points() const { return static_cast<int>(std::lround(R_max / h)) - 1; }

void RadialDiscretization::validate() const
{
    if (!(R_max > 0.0) || !(h > 0.0) || interior_points() < 8)
        throw Error(ErrorKind::config, "radial grid needs R_max > 0, h > 0 and at least 8 interior nodes");
    if (l_max < 0) throw Error(ErrorKind::config, "l_max must be >= 0");
}

Tridiagonal assemble_radial_hamiltonian(int l, const RadialDiscretization& disc, const PotentialModel& V)
{
    if (l < 0) throw Error(ErrorKind::invalid_argument, "angular momentum l must be >= 0");
    disc.validate();
    if (!V.radial() && !V.is_zero()) throw Error(ErrorKind::invalid_argument, "partial waves need a radial potential");
    const int n = disc.interior_points();
    const double h2 = disc.h * disc.h;
    const double cent = static_cast<double>(l) * (l + 1);
    Tridiagonal t;
    t.diag.resize(n);
    t.off.assign(n - 1, -1.0 / h2);
    const std::vector<double> jumps = V.is_zero() ? std::vector<double>{} : V.breakpoints();
    for (int i = 0; i < n; ++i) {
        const double r = (i + 1) * disc.h;
        double v = V.is_zero() ? 0.0 : V.radial_value(r);
        // a node on a jump takes the mean of the one-sided limits
        for (double b : jumps)
            if (std::abs(r - b) <= 1e-9 * disc.h)
                v = 0.5 * (V.radial_value(b - 1e-7 * disc.h) + V.radial_value(b + 1e-7 * disc.h));
        t.diag[i] = 2.0 / h2 + cent / (r * r) + v;
    }
    return t;
}

double dispersion_corrected(double E, double h)
{
    if (E < 0.0) return E;
    const double s = std::min(1.0, 0.5 * h * std::sqrt(E));
    const double k = 2.0 / h * std::asin(s);
    return k * k;
}

int SpectralData::stored_rows() const
{
    return std::min(disc.interior_points(), static_cast<int>(std::floor(stored_radius / disc.h)) + 3);
}

namespace {

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

PartialWave solve_wave(int l, const RadialDiscretization& disc, const PotentialModel& V, double lambda_max,
                       int rows)
{
    Tridiagonal t = assemble_radial_hamiltonian(l, disc, V);
    const lapack_int n = static_cast<lapack_int>(t.diag.size());
    std::vector<double> e(t.off);
    e.push_back(0.0);
    std::vector<double> w(n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const bool all = l == 0;
    // count first to size the eigenvector block
    lapack_int cap = n;
    if (!all) {
        std::vector<double> d2(t.diag), e2(e), w2(n);
        lapack_int m2 = 0;
        std::vector<lapack_int> dummy(2 * static_cast<std::size_t>(n));
        double z2 = 0.0;
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'V', n, d2.data(), e2.data(), -1e300, lambda_max, 0, 0, 0.0, &m2,
                       w2.data(), &z2, 1, dummy.data());
        cap = std::max<lapack_int>(m2, 1);
    }
    std::vector<double> z(static_cast<std::size_t>(n) * cap);
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', all ? 'A' : 'V', n, t.diag.data(), e.data(), -1e300, lambda_max, 0, 0,
                       0.0, &found, w.data(), z.data(), n, isuppz.data());
    if (info != 0) throw Error(ErrorKind::invariant_violation, "dstevr failed for l = " + std::to_string(l));

    PartialWave pw;
    pw.l = l;
    const int keep_rows = all ? static_cast<int>(n) : rows;
    pw.vectors.resize(keep_rows, found);
    for (lapack_int k = 0; k < found; ++k) {
        pw.raw_eigenvalues.push_back(w[k]);
        pw.eigenvalues.push_back(dispersion_corrected(w[k], disc.h));
        // fix the sign so the first nonzero node is positive
        double sign = 1.0;
        for (lapack_int i = 0; i < n; ++i)
            if (std::abs(z[k * n + i]) > 1e-12) {
                sign = z[k * n + i] > 0.0 ? 1.0 : -1.0;
                break;
            }
        for (int i = 0; i < keep_rows; ++i) pw.vectors(i, k) = sign * z[k * n + i];
    }
    return pw;
}

// u(r) by 4-point Lagrange interpolation on r_i = (i + 1) h with the Dirichlet ghost u(0) = 0.
double interpolate(const Eigen::MatrixXd& U, int k, double r, double h)
{
    const int rows = static_cast<int>(U.rows());
    auto node = [&](int j) { return j < 0 ? 0.0 : U(j, k); };  // j = -1 is r = 0
    const double t = r / h - 1.0;
    int j0 = static_cast<int>(std::floor(t)) - 1;
    j0 = std::clamp(j0, -1, rows - 4);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double L = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) L *= (t - (j0 + b)) / static_cast<double>(a - b);
        acc += L * node(j0 + a);
    }
    return acc;
}

} // namespace

std::string spectral_cache_key(const PotentialModel& V, const RadialDiscretization& disc, double lambda_max)
{
    std::ostringstream os;
    os.precision(17);
    os << "spectral|" << V.signature() << "|R=" << disc.R_max << "|h=" << disc.h << "|l=" << disc.l_max
       << "|lmax=" << lambda_max;
    return hex(fnv1a(os.str()));
}

std::string SpectralData::cache_key() const { return key; }

SpectralData solve_spectrum(const PotentialModel& V, const RadialDiscretization& disc, double lambda_max)
{
    disc.validate();
    SpectralData out;
    out.disc = disc;
    out.key = spectral_cache_key(V, disc, lambda_max);
    out.lambda_max = lambda_max;
    out.stored_radius = 0.5 * disc.R_max;
    out.waves.resize(disc.l_max + 1);
    const int rows = out.stored_rows();
#pragma omp parallel for schedule(dynamic)
    for (int l = 0; l <= disc.l_max; ++l) out.waves[l] = solve_wave(l, disc, V, lambda_max, rows);
    for (const auto& w : out.waves)
        for (double e : w.raw_eigenvalues)
            if (e < 0.0) out.negative_eigenvalues.push_back(e);
    return out;
}

void save_spectral(const SpectralData& d, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::config, "cannot write spectral cache " + path);
    auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    const std::uint64_t magic = 0x4c504b5350454331ull;
    put(magic);
    const std::uint64_t klen = d.key.size();
    put(klen);
    os.write(d.key.data(), static_cast<std::streamsize>(klen));
    put(d.disc.R_max);
    put(d.disc.h);
    put(d.disc.l_max);
    put(d.lambda_max);
    put(d.stored_radius);
    for (const auto& w : d.waves) {
        const std::uint64_t cnt = w.raw_eigenvalues.size();
        const std::uint64_t rows = static_cast<std::uint64_t>(w.vectors.rows());
        put(w.l);
        put(cnt);
        put(rows);
        os.write(reinterpret_cast<const char*>(w.raw_eigenvalues.data()), static_cast<std::streamsize>(cnt * 8));
        os.write(reinterpret_cast<const char*>(w.vectors.data()), static_cast<std::streamsize>(cnt * rows * 8));
    }
}

std::optional<SpectralData> load_spectral(const std::string& path, const std::string& expected_key)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    auto get = [&](auto& v) { is.read(reinterpret_cast<char*>(&v), sizeof(v)); };
    std::uint64_t magic = 0, klen = 0;
    get(magic);
    if (magic != 0x4c504b5350454331ull) return std::nullopt;
    get(klen);
    if (klen > 4096) return std::nullopt;
    SpectralData d;
    d.key.resize(klen);
    is.read(d.key.data(), static_cast<std::streamsize>(klen));
    if (d.key != expected_key) return std::nullopt;
    get(d.disc.R_max);
    get(d.disc.h);
    get(d.disc.l_max);
    get(d.lambda_max);
    get(d.stored_radius);
    d.waves.resize(d.disc.l_max + 1);
    for (auto& w : d.waves) {
        std::uint64_t cnt = 0, rows = 0;
        get(w.l);
        get(cnt);
        get(rows);
        w.raw_eigenvalues.resize(cnt);
        w.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cnt));
        is.read(reinterpret_cast<char*>(w.raw_eigenvalues.data()), static_cast<std::streamsize>(cnt * 8));
        is.read(reinterpret_cast<char*>(w.vectors.data()), static_cast<std::streamsize>(cnt * rows * 8));
        for (double e : w.raw_eigenvalues) {
            w.eigenvalues.push_back(dispersion_corrected(e, d.disc.h));
            if (e < 0.0) d.negative_eigenvalues.push_back(e);
        }
    }
    if (!is) return std::nullopt;
    return d;
}

OracleKernel multiplier_kernel(const SpectralMultiplier& m, const Vec3& x, const Vec3& y, const SpectralData& data,
                               double tail_tolerance)
{
    const double rx = x.norm(), ry = y.norm();
    if (rx > data.stored_radius + 1e-12 || ry > data.stored_radius + 1e-12)
        throw Error(ErrorKind::invalid_argument, "oracle points must satisfy |x|, |y| <= R_max / 2");
    if (rx <= 0.0 || ry <= 0.0) throw Error(ErrorKind::invalid_argument, "oracle points must avoid the origin");
    const double h = data.disc.h;
    const double c = std::clamp(x.dot(y) / (rx * ry), -1.0, 1.0);

    OracleKernel out;
    double p_prev = 1.0, p_cur = c;  // P_0, P_1
    double magnitude = 0.0, last = 0.0, before_last = 0.0;
    for (const PartialWave& w : data.waves) {
        const int l = w.l;
        double Pl = 1.0;
        if (l == 1) Pl = c;
        if (l >= 2) {
            const double next = ((2.0 * l - 1.0) * c * p_cur - (l - 1.0) * p_prev) / l;
            p_prev = p_cur;
            p_cur = next;
            Pl = next;
        }
        double radial = 0.0;
        for (std::size_t k = 0; k < w.eigenvalues.size(); ++k) {
            const double mk = m(w.eigenvalues[k]);
            if (mk == 0.0) continue;
            radial += mk * interpolate(w.vectors, static_cast<int>(k), rx, h) *
                      interpolate(w.vectors, static_cast<int>(k), ry, h);
        }
        const double contrib = (2.0 * l + 1.0) / four_pi * Pl * radial / (rx * ry * h);
        out.value += contrib;
        magnitude += std::abs(contrib);
        before_last = last;
        last = std::abs(contrib);
        out.l_used = l;
    }
    out.l_tail = last + before_last;
    if (out.l_tail > tail_tolerance * std::max(magnitude, 1e-300) && magnitude > 0.0)
        throw Error(ErrorKind::grid_refinement, "partial-wave tail " + std::to_string(out.l_tail) +
                                                    " exceeds tolerance; increase l_max");
    return out;
}

SpectralMultiplier projection_multiplier(const MultiplierProfile& profile, double N)
{
    return [profile, N](double lambda) { return lambda > 0.0 ? profile.chi(std::sqrt(lambda) / N) : 0.0; };
}

SpectralMultiplier sobolev_multiplier(const MultiplierProfile& profile, double s, const std::vector<double>& window)
{
    if (!(s >= 0.0 && s < 3.0)) throw Error(ErrorKind::invalid_argument, "sobolev exponent s must lie in [0, 3)");
    return [profile, s, window](double lambda) {
        if (!(lambda > 0.0)) return 0.0;
        const double k = std::sqrt(lambda);
        double acc = 0.0;
        for (double N : window) acc += profile.chi(k / N);
        return acc == 0.0 ? 0.0 : acc * std::pow(lambda, -0.5 * s);
    };
}

OracleKernel sobolev_multiplier_kernel(const MultiplierProfile& profile, double s, const std::vector<double>& window,
                                       const Vec3& x, const Vec3& y, const SpectralData& data)
{
    if (!(s > 0.0 && s < 3.0)) throw Error(ErrorKind::invalid_argument, "sobolev exponent s must lie in (0, 3)");
    return multiplier_kernel(sobolev_multiplier(profile, s, window), x, y, data);
}

RadialSamples sample_radial(const std::function<double(double)>& f, const SpectralData& data)
{
    const int n = data.disc.interior_points();
    RadialSamples out(n);
    for (int i = 0; i < n; ++i) out[i] = f(data.r(i));
    return out;
}

RadialSamples apply_radial(const SpectralMultiplier& m, const RadialSamples& f, const SpectralData& data)
{
    const PartialWave& w = data.waves.at(0);
    const int n = static_cast<int>(f.size());
    if (w.vectors.rows() != n) throw Error(ErrorKind::invalid_argument, "radial samples do not match the grid");
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = data.r(i) * f[i];
    Eigen::VectorXd coef = w.vectors.transpose() * g;
    for (Eigen::Index k = 0; k < coef.size(); ++k) coef[k] *= m(w.eigenvalues[k]);
    const Eigen::VectorXd out = w.vectors * coef;
    RadialSamples res(n);
    for (int i = 0; i < n; ++i) res[i] = out[i] / data.r(i);
    return res;
}

RadialSamples continuous_projection_apply(const RadialSamples& f, const SpectralData& data)
{
    return apply_radial([](double lambda) { return lambda >= 0.0 ? 1.0 : 0.0; }, f, data);
}

double radial_lp_norm(const RadialSamples& f, const SpectralData& data, double p)
{
    if (std::isinf(p)) {
        double mx = 0.0;
        for (double v : f) mx = std::max(mx, std::abs(v));
        return mx;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = data.r(static_cast<int>(i));
        acc += four_pi * r * r * std::pow(std::abs(f[i]), p) * data.disc.h;
    }
    return std::pow(acc, 1.0 / p);
}

double free_radial_multiplier_kernel(const SpectralMultiplier& m, double k_lo, double k_hi, double rho)
{
    const int panels = 8 + static_cast<int>(std::ceil((k_hi - k_lo) * std::max(rho, 1.0)));
    const PanelRule r = composite_gauss(k_lo, k_hi, panels, 16);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double k = r.nodes[i];
        const double s = rho > 0.0 ? std::sin(k * rho) / rho : k;
        acc += r.weights[i] * m(k * k) * k * s;
    }
    return acc / (2.0 * pi * pi);
}

} // namespace lpk
