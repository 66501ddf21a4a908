#include "xfphoton/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>

#include "xfphoton/errors.hpp"

namespace xfp {

double photon_number(double q2, double p2, double omega) {
    return 0.5 * (omega * q2 + p2 / omega) - 0.5;
}

void ObservableSeries::append(double t, double q2_value, double p2_chi_value, double kin,
                              double norm_value, std::size_t excluded_count) {
    const double p2_value = p2_chi_value + kin;
    times.push_back(t);
    q2.push_back(q2_value);
    p2_chi.push_back(p2_chi_value);
    kin_correction.push_back(kin);
    p2.push_back(p2_value);
    n_photon.push_back(photon_number(q2_value, p2_value, omega_c));
    norm.push_back(norm_value);
    excluded.push_back(excluded_count);
}

double ObservableSeries::identity_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        worst = std::max(worst, std::abs(n_photon[i] - photon_number(q2[i], p2[i], omega_c)));
        worst = std::max(worst, std::abs(p2[i] - p2_chi[i] - kin_correction[i]));
    }
    return worst;
}

const std::vector<double>& ObservableSeries::column(const std::string& name) const {
    if (name == "N") return n_photon;
    if (name == "q2") return q2;
    if (name == "p2") return p2;
    if (name == "p2_chi") return p2_chi;
    if (name == "kin" || name == "kin_correction") return kin_correction;
    if (name == "norm") return norm;
    throw ConfigError("unknown series column '" + name + "'");
}

double ObservableSeries::at(const std::string& name, double t) const {
    const auto& col = column(name);
    if (times.empty()) throw ConfigError("empty series");
    if (t <= times.front()) return col.front();
    if (t >= times.back()) return col.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin());
    const double a = (t - times[k - 1]) / (times[k] - times[k - 1]);
    return (1.0 - a) * col[k - 1] + a * col[k];
}

double kinetic_correction(std::span<const double> density, std::span<const double> ekin, double dq) {
    if (density.size() != ekin.size())
        throw ConfigError("density and kinetic surface live on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) s += density[i] * ekin[i];
    return 2.0 * s * dq;
}

double p2_corrected(double p2_chi, std::span<const double> density, std::span<const double> ekin,
                    double dq) {
    return p2_chi + kinetic_correction(density, ekin, dq);
}

std::vector<double> movie_at(const ScalarSurfaceMovie& movie, double t) {
    const auto b = locate_time(movie.times, t);
    const std::size_t k1 = std::min(b.k + 1, movie.frames() - 1);
    const auto f0 = movie.frame(b.k);
    const auto f1 = movie.frame(k1);
    std::vector<double> out(f0.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - b.alpha) * f0[i] + b.alpha * f1[i];
    return out;
}

ObservableSeries exact_series(const SnapshotSeries& series, double every) {
    ObservableSeries out;
    out.method = "exact";
    out.omega_c = series.params.omega_c;
    if (series.frames.empty()) return out;
    Spectral spectral(series.grid);
    std::size_t skip = 1;
    if (every > 0.0) {
        skip = static_cast<std::size_t>(std::llround(every / series.stride));
        if (skip == 0 || std::abs(static_cast<double>(skip) * series.stride - every) > 1e-9 * every)
            throw ConfigError("observable stride must be a multiple of the snapshot stride");
    }
    for (std::size_t k = 0; k < series.frames.size(); k += skip) {
        const auto m = wavefunction_observables(series.frames[k], series.params, spectral);
        out.append(series.frames[k].t, m.q2, m.p2, 0.0, m.norm);
    }
    return out;
}

ObservableSeries surface_quantum_series(const std::string& method,
                                        const std::vector<ScalarWavefunction>& frames,
                                        double omega_c, const ScalarSurfaceMovie* ekin) {
    ObservableSeries out;
    out.method = method;
    out.omega_c = omega_c;
    if (frames.empty()) return out;
    Spectral spectral(frames.front().grid);
    for (const auto& chi : frames) {
        const auto m = scalar_observables(chi, spectral);
        double kin = 0.0;
        if (ekin) {
            if (!(ekin->grid == chi.grid)) throw ConfigError("kinetic surface grid mismatch");
            kin = kinetic_correction(chi.density(), movie_at(*ekin, chi.t), chi.grid.dq());
        }
        out.append(chi.t, m.q2, m.p2, kin, m.norm);
    }
    return out;
}

EnsembleMoments ensemble_moments(const Ensemble& ensemble) {
    EnsembleMoments m;
    for (const auto& t : ensemble.trajectories) {
        if (t.diverged) {
            ++m.excluded;
            continue;
        }
        ++m.used;
        m.q_mean += t.q;
        m.p_mean += t.p;
        m.q2 += t.q * t.q;
        m.p2 += t.p * t.p;
        m.q4 += t.q * t.q * t.q * t.q;
        m.p4 += t.p * t.p * t.p * t.p;
    }
    if (m.used > 0) {
        const double n = static_cast<double>(m.used);
        m.q_mean /= n;
        m.p_mean /= n;
        m.q2 /= n;
        m.p2 /= n;
        m.q4 /= n;
        m.p4 /= n;
    }
    return m;
}

double silverman_bandwidth(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        const double pos = p * (n - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    return 0.9 * spread * std::pow(n, -0.2);
}

std::vector<double> parity_symmetrize(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<double> out(values.begin(), values.end());
    for (std::size_t i = 1; i < n; ++i) out[i] = 0.5 * (values[i] + values[n - i]);
    return out;
}

EnsembleDensity ensemble_density(const Ensemble& ensemble, const Grid& grid,
                                 const DensityOptions& opts) {
    std::vector<double> qs;
    qs.reserve(ensemble.size());
    for (const auto& t : ensemble.trajectories)
        if (!t.diverged) qs.push_back(t.q);
    if (qs.size() < std::max<std::size_t>(1, opts.min_trajectories)) {
        std::ostringstream os;
        os << "only " << qs.size() << " surviving trajectories, need " << opts.min_trajectories;
        throw InvariantViolation(os.str());
    }
    const std::size_t n = grid.n_points;
    const double dq = grid.dq();
    EnsembleDensity out;
    out.values.assign(n, 0.0);
    out.used = qs.size();
    if (opts.estimator == DensityEstimator::histogram) {
        for (double q : qs) {
            const double s = std::floor((q - grid.q_min) / dq + 0.5);
            if (s < 0.0 || s >= static_cast<double>(n)) {
                ++out.overflow;
                continue;
            }
            out.values[static_cast<std::size_t>(s)] += 1.0;
        }
    } else {
        const double h = opts.bandwidth > 0.0 ? opts.bandwidth : silverman_bandwidth(qs);
        if (!(h > 0.0)) throw InvariantViolation("degenerate ensemble: zero KDE bandwidth");
        out.bandwidth = h;
        const double cut = 8.0 * h;
        for (double q : qs) {
            if (q < grid.q_min - 0.5 * dq || q >= grid.q_max - 0.5 * dq) ++out.overflow;
            const double lo = std::ceil((q - cut - grid.q_min) / dq);
            const double hi = std::floor((q + cut - grid.q_min) / dq);
            const auto i0 = static_cast<std::size_t>(std::max(0.0, lo));
            const auto i1 = static_cast<std::size_t>(std::min(static_cast<double>(n) - 1.0, hi));
            for (std::size_t i = i0; i <= i1 && hi >= 0.0; ++i) {
                const double z = (grid.q(i) - q) / h;
                out.values[i] += std::exp(-0.5 * z * z);
            }
        }
    }
    const double total = std::accumulate(out.values.begin(), out.values.end(), 0.0) * dq;
    if (total > 0.0)
        for (auto& v : out.values) v /= total;
    return out;
}

nlohmann::json ComparisonReport::to_json() const {
    nlohmann::json j;
    j["reference"] = reference;
    j["candidate"] = candidate;
    j["quantity"] = quantity;
    j["period"] = period;
    j["max_abs"] = max_abs;
    j["windows"] = nlohmann::json::array();
    for (const auto& w : windows) {
        j["windows"].push_back({{"name", w.name},
                                {"lo", w.lo},
                                {"hi", w.hi},
                                {"points", w.points},
                                {"max_abs", w.max_abs},
                                {"l1", w.l1},
                                {"mean_signed", w.mean_signed},
                                {"frac_below", w.frac_below},
                                {"frac_above", w.frac_above},
                                {"p_below", w.p_below},
                                {"p_above", w.p_above},
                                {"strictly_below", w.strictly_below},
                                {"strictly_above", w.strictly_above}});
    }
    return j;
}

const WindowStats& ComparisonReport::window(const std::string& name) const {
    for (const auto& w : windows)
        if (w.name == name) return w;
    throw ConfigError("no comparison window '" + name + "'");
}

namespace {

// P(X >= k) for X ~ Binomial(n, 1/2).
double sign_test_tail(std::size_t k, std::size_t n) {
    if (n == 0 || k == 0) return 1.0;
    boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k) - 1.0));
}

}  // namespace

ComparisonReport compare_series(const ObservableSeries& reference,
                                const ObservableSeries& candidate, double period,
                                const std::string& quantity) {
    if (reference.size() == 0 || candidate.size() == 0) throw ConfigError("empty series");
    const double lo = std::max(reference.times.front(), candidate.times.front());
    const double hi = std::min(reference.times.back(), candidate.times.back());
    if (lo > hi) throw ConfigError("series have disjoint time ranges");

    ComparisonReport rep;
    rep.reference = reference.method;
    rep.candidate = candidate.method;
    rep.quantity = quantity;
    rep.period = period;

    const auto& ref = reference.column(quantity);
    std::vector<double> ts, diff;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double t = reference.times[i];
        if (t < lo - 1e-12 || t > hi + 1e-12) continue;
        ts.push_back(t);
        diff.push_back(candidate.at(quantity, t) - ref[i]);
        rep.max_abs = std::max(rep.max_abs, std::abs(diff.back()));
    }

    struct Spec {
        const char* name;
        double a, b;
        bool open;
    };
    const Spec specs[] = {{"early", 0.0, 0.25 * period, false},
                          {"late", 0.25 * period, 0.5 * period, false},
                          {"bias", 0.1 * period, 0.5 * period, true}};
    for (const auto& s : specs) {
        WindowStats w;
        w.name = s.name;
        w.lo = s.a;
        w.hi = s.b;
        std::size_t below = 0, above = 0;
        double prev_t = 0.0, prev_d = 0.0;
        bool have_prev = false;
        double sum = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double t = ts[i];
            const bool inside = s.open ? (t > s.a && t < s.b) : (t >= s.a - 1e-12 && t <= s.b + 1e-12);
            if (!inside) continue;
            const double d = diff[i];
            ++w.points;
            sum += d;
            w.max_abs = std::max(w.max_abs, std::abs(d));
            if (d < 0.0) ++below;
            if (d > 0.0) ++above;
            if (have_prev) w.l1 += 0.5 * (t - prev_t) * (std::abs(d) + std::abs(prev_d));
            prev_t = t;
            prev_d = d;
            have_prev = true;
        }
        if (w.points > 0) {
            const double n = static_cast<double>(w.points);
            w.mean_signed = sum / n;
            w.frac_below = static_cast<double>(below) / n;
            w.frac_above = static_cast<double>(above) / n;
            w.p_below = sign_test_tail(below, below + above);
            w.p_above = sign_test_tail(above, below + above);
            w.strictly_below = below == w.points;
            w.strictly_above = above == w.points;
        }
        rep.windows.push_back(w);
    }
    return rep;
}

}  // namespace xfp
