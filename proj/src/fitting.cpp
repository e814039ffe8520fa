#include "spinchi/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "spinchi/constants.hpp"

namespace spinchi {

namespace {

constexpr double k_conv = constants::mu_B_per_k_B_K_per_T;

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// dense Gaussian elimination with partial pivoting
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) throw FitError("singular normal equations");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

std::vector<std::vector<double>> invert_dense(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (int c = 0; c < n; ++c) {
        std::vector<double> e(n, 0.0);
        e[c] = 1.0;
        const auto col = solve_dense(a, e);
        for (int r = 0; r < n; ++r) inv[r][c] = col[r];
    }
    return inv;
}

struct ConstrainedSolution {
    std::vector<double> coeff;       // full-length, pinned entries are 0
    std::vector<double> se;          // 0 for pinned entries
    double rss = 0.0;
    bool sum_constraint_active = false;
};

// min ||G c - y||^2 subject to c >= 0 and (optionally) sum c <= 1, solved by
// deterministic enumeration of active sets; ties resolve to the earliest
// enumeration (fewest pinned variables, inequality inactive first).
ConstrainedSolution nnls_simplex(const std::vector<std::vector<double>>& columns,
                                 const std::vector<double>& y, bool cap_sum) {
    const int p = static_cast<int>(columns.size());
    const int n = static_cast<int>(y.size());
    if (p == 0 || n == 0) throw FitError("empty least-squares problem");

    // normal-equation blocks
    std::vector<std::vector<double>> gtg(p, std::vector<double>(p, 0.0));
    std::vector<double> gty(p, 0.0);
    double yty = 0.0;
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            double s = 0.0;
            for (int r = 0; r < n; ++r) s += columns[i][r] * columns[j][r];
            gtg[i][j] = gtg[j][i] = s;
        }
        for (int r = 0; r < n; ++r) gty[i] += columns[i][r] * y[r];
    }
    for (int r = 0; r < n; ++r) yty += y[r] * y[r];

    constexpr double feas_tol = 1e-12;
    bool found = false;
    double best_rss = 0.0;
    std::vector<double> best_c;
    bool best_sum_active = false;
    std::vector<int> best_free;

    const int n_masks = 1 << p;
    for (int sum_active = 0; sum_active <= (cap_sum ? 1 : 0); ++sum_active) {
        for (int mask = 0; mask < n_masks; ++mask) {
            std::vector<int> free_idx;
            for (int i = 0; i < p; ++i)
                if (!(mask & (1 << i))) free_idx.push_back(i);
            const int nf = static_cast<int>(free_idx.size());
            if (nf == 0 && sum_active) continue;

            std::vector<double> c(p, 0.0);
            if (nf > 0) {
                const int dim = nf + (sum_active ? 1 : 0);
                std::vector<std::vector<double>> a(dim, std::vector<double>(dim, 0.0));
                std::vector<double> b(dim, 0.0);
                for (int i = 0; i < nf; ++i) {
                    for (int j = 0; j < nf; ++j) a[i][j] = gtg[free_idx[i]][free_idx[j]];
                    b[i] = gty[free_idx[i]];
                    if (sum_active) a[i][nf] = a[nf][i] = 1.0; // Lagrange border
                }
                if (sum_active) b[nf] = 1.0, a[nf][nf] = 0.0;
                std::vector<double> sol;
                try {
                    sol = solve_dense(a, b);
                } catch (const FitError&) {
                    continue;
                }
                for (int i = 0; i < nf; ++i) c[free_idx[i]] = sol[i];
            }

            double sum_c = 0.0;
            bool feasible = true;
            for (int i = 0; i < p; ++i) {
                if (c[i] < -feas_tol) feasible = false;
                c[i] = std::max(c[i], 0.0);
                sum_c += c[i];
            }
            if (cap_sum && !sum_active && sum_c > 1.0 + feas_tol) feasible = false;
            if (sum_active && std::abs(sum_c - 1.0) > 1e-9) feasible = false;
            if (!feasible) continue;

            double rss = yty;
            for (int i = 0; i < p; ++i) {
                rss -= 2.0 * c[i] * gty[i];
                for (int j = 0; j < p; ++j) rss += c[i] * c[j] * gtg[i][j];
            }
            rss = std::max(rss, 0.0);
            if (!found || rss < best_rss * (1.0 - 1e-12)) {
                found = true;
                best_rss = rss;
                best_c = c;
                best_sum_active = sum_active;
                best_free = free_idx;
            }
        }
    }
    if (!found) throw FitError("active-set enumeration found no feasible solution");

    ConstrainedSolution out;
    out.coeff = best_c;
    out.rss = best_rss;
    out.sum_constraint_active = best_sum_active;
    out.se.assign(p, 0.0);
    const int nf = static_cast<int>(best_free.size());
    const int dof = n - nf - (best_sum_active ? 1 : 0);
    if (nf > 0 && dof > 0) {
        std::vector<std::vector<double>> gtg_free(nf, std::vector<double>(nf));
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nf; ++j) gtg_free[i][j] = gtg[best_free[i]][best_free[j]];
        const auto cov = invert_dense(gtg_free);
        const double sigma2 = best_rss / dof;
        for (int i = 0; i < nf; ++i)
            out.se[best_free[i]] = std::sqrt(std::max(cov[i][i] * sigma2, 0.0));
    }
    return out;
}

} // namespace

PeakSet detect_peaks(const ResponseCurve& curve, double min_prominence) {
    const auto& x = curve.field_T;
    const auto& v = curve.value;
    if (x.size() != v.size()) throw FitError("curve fields and values differ in length");
    if (x.size() < 5) throw FitError("need at least 5 grid points");
    if (!(min_prominence > 0.0) || !(min_prominence < 1.0))
        throw FitError("min_prominence must be in (0, 1)");

    const double vmax = *std::max_element(v.begin(), v.end());
    const double vmin = *std::min_element(v.begin(), v.end());
    const double range = vmax - vmin;
    if (!(range > 0.0)) throw FitError("no peaks found: curve is constant");

    PeakSet out;
    const int n = static_cast<int>(v.size());
    for (int i = 1; i + 1 < n; ++i) {
        if (!(v[i] > v[i - 1] && v[i] > v[i + 1])) continue;
        // prominence: drop to the lowest point before a higher value is met
        double lmin = v[i], rmin = v[i];
        for (int l = i - 1; l >= 0; --l) {
            if (v[l] > v[i]) break;
            lmin = std::min(lmin, v[l]);
        }
        for (int r = i + 1; r < n; ++r) {
            if (v[r] > v[i]) break;
            rmin = std::min(rmin, v[r]);
        }
        const double prominence = v[i] - std::max(lmin, rmin);
        if (prominence < min_prominence * range) continue;

        // three-point quadratic refinement
        const double denom = v[i - 1] - 2.0 * v[i] + v[i + 1];
        double dx = 0.0, height = v[i];
        if (denom < 0.0) {
            dx = 0.5 * (v[i - 1] - v[i + 1]) / denom;
            const double h = x[i + 1] - x[i];
            height = v[i] - 0.25 * (v[i - 1] - v[i + 1]) * dx;
            dx *= h;
        }
        // half-prominence width
        const double half = v[i] - 0.5 * prominence;
        double left = x.front(), right = x.back();
        for (int l = i - 1; l >= 0; --l)
            if (v[l] <= half) {
                left = x[l] + (x[l + 1] - x[l]) * (half - v[l]) / (v[l + 1] - v[l]);
                break;
            }
        for (int r = i + 1; r < n; ++r)
            if (v[r] <= half) {
                right = x[r] - (x[r] - x[r - 1]) * (half - v[r]) / (v[r - 1] - v[r]);
                break;
            }
        out.peaks.push_back({x[i] + dx, height, right - left, prominence});
    }
    if (out.peaks.empty()) throw FitError("no peaks found above the prominence threshold");
    return out;
}

FitResult fit_hyperfine_A(const PeakSet& peaks, double moment_mu,
                          double projection, double nuclear_I) {
    const int n = static_cast<int>(peaks.peaks.size());
    const int n_channels = static_cast<int>(std::round(2.0 * nuclear_I)) / 2 + 1;
    if (n < 2) throw FitError("hyperfine fit needs at least 2 peaks");
    if (n > n_channels)
        throw FitError("more peaks (" + std::to_string(n) + ") than channels (" +
                       std::to_string(n_channels) + ")");
    const double mu_eff = projection * moment_mu * k_conv; // K/T

    // peaks in field order are assigned m = 1/2, 3/2, ...
    double smb = 0.0, sm2 = 0.0;
    std::vector<double> m(n), b(n);
    for (int i = 0; i < n; ++i) {
        m[i] = i + 0.5;
        b[i] = std::abs(peaks.peaks[i].field_T);
        smb += m[i] * b[i];
        sm2 += m[i] * m[i];
    }
    const double a_est = mu_eff * smb / sm2;

    // per-peak estimates must agree, otherwise the ordinal assignment is wrong
    double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ai = mu_eff * b[i] / m[i];
        amin = std::min(amin, ai);
        amax = std::max(amax, ai);
    }
    if ((amax - amin) > 0.25 * a_est)
        throw FitError("peak-to-m_I assignment inconsistent: per-peak hyperfine "
                       "estimates spread from " + fmt(amin) + " to " + fmt(amax) + " K");

    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = b[i] - a_est * m[i] / mu_eff;
        rss += r * r;
    }
    const double se = mu_eff * std::sqrt(rss / (n - 1) / sm2);

    FitResult out;
    out.parameters["A_K"] = a_est;
    out.standard_errors["A_K"] = se;
    out.residual_norm = std::sqrt(rss);
    std::ostringstream d;
    d << "B_n = A m_n / (projection mu mu_B/k_B); peaks assigned m = 1/2 .. "
      << (n - 0.5) << "; linear-regression standard error";
    out.model_description = d.str();
    return out;
}

FitResult fit_weights_with_basis(const ResponseCurve& data,
                                 const std::vector<ResponseCurve>& basis,
                                 bool fit_scale) {
    if (basis.empty()) throw FitError("no basis curves");
    const int n = static_cast<int>(data.value.size());
    if (n < static_cast<int>(basis.size()) + 1)
        throw FitError("not enough data points for the basis");

    std::vector<std::vector<double>> columns;
    for (const auto& bcurve : basis) {
        if (bcurve.field_T == data.field_T) {
            columns.push_back(bcurve.value);
        } else {
            if (data.field_T.front() < bcurve.field_T.front() - 1e-12 ||
                data.field_T.back() > bcurve.field_T.back() + 1e-12)
                throw FitError("data grid extends outside the model grid");
            columns.push_back(interpolate_monotone_cubic(bcurve.field_T,
                                                         bcurve.value, data.field_T));
        }
    }

    const auto sol = nnls_simplex(columns, data.value, /*cap_sum=*/!fit_scale);
    const int p = static_cast<int>(columns.size());

    FitResult out;
    out.residual_norm = std::sqrt(sol.rss);
    double sum_c = std::accumulate(sol.coeff.begin(), sol.coeff.end(), 0.0);
    if (sum_c == 0.0) throw FitError("all-zero solution: data has no model content");

    if (fit_scale) {
        // only ratios are identifiable; report weights normalized to sum 1
        out.scale = sum_c;
        for (int i = 0; i < p; ++i) {
            const std::string name = "f" + std::to_string(i + 1);
            out.parameters[name] = sol.coeff[i] / sum_c;
            // delta method on c_i / sum c with a diagonal covariance
            double g2 = 0.0;
            for (int j = 0; j < p; ++j) {
                const double grad = (i == j ? sum_c - sol.coeff[i] : -sol.coeff[i]) /
                                    (sum_c * sum_c);
                g2 += grad * grad * sol.se[j] * sol.se[j];
            }
            out.standard_errors[name] = std::sqrt(g2);
        }
        out.model_description =
            "free global scale: weights are relative (sum 1), f0 not identifiable";
    } else {
        double f0 = 1.0, f0_var = 0.0;
        for (int i = 0; i < p; ++i) {
            const std::string name = "f" + std::to_string(i + 1);
            out.parameters[name] = sol.coeff[i];
            out.standard_errors[name] = sol.se[i];
            f0 -= sol.coeff[i];
            f0_var += sol.se[i] * sol.se[i];
        }
        out.parameters["f0"] = std::max(f0, 0.0);
        out.standard_errors["f0"] = std::sqrt(f0_var);
        out.model_description = sol.sum_constraint_active
                                    ? "constrained linear least squares; sum f = 1 active"
                                    : "constrained linear least squares";
    }
    return out;
}

FitResult fit_weights(const ResponseCurve& data, const Material& material,
                      double temperature_K, double probe_amplitude_T,
                      bool fit_scale) {
    if (!(temperature_K > 0.0)) throw FitError("temperature must be > 0");
    const ResponseKind kind = probe_amplitude_T > 0.0
                                  ? ResponseKind::isolated_finite_amplitude
                                  : ResponseKind::isolated;
    std::vector<ResponseCurve> basis;
    for (const auto& comp : material.distribution.components()) {
        Material single = material;
        single.distribution = DeltaDistribution::single(comp.gap_K);
        basis.push_back(total_spectrum(single, data.field_T, temperature_K, kind,
                                       PopulationScheme::boltzmann(),
                                       probe_amplitude_T));
    }
    auto out = fit_weights_with_basis(data, basis, fit_scale);
    std::ostringstream d;
    d << out.model_description << "; basis gaps (K):";
    for (const auto& comp : material.distribution.components()) d << " " << comp.gap_K;
    out.model_description = d.str();
    return out;
}

FitResult fit_curie(std::span<const std::pair<double, double>> data_T_chi,
                    double concentration_x) {
    const int n = static_cast<int>(data_T_chi.size());
    if (n < 3) throw FitError("Curie fit needs at least 3 points");
    double sx = 0.0, sx2 = 0.0, sy = 0.0, sxy = 0.0;
    for (const auto& [t, chi] : data_T_chi) {
        if (!(t > 0.0)) throw FitError("temperatures must be > 0");
        const double x = 1.0 / t;
        sx += x;
        sx2 += x * x;
        sy += chi;
        sxy += x * chi;
    }
    const double det = n * sx2 - sx * sx;
    if (std::abs(det) < 1e-14 * n * sx2)
        throw FitError("rank-deficient Curie fit: all temperatures equal");
    const double c = (n * sxy - sx * sy) / det;
    const double chi0 = (sy * sx2 - sx * sxy) / det;

    double rss = 0.0;
    for (const auto& [t, chi] : data_T_chi) {
        const double r = chi - (c / t + chi0);
        rss += r * r;
    }
    const double sigma2 = n > 2 ? rss / (n - 2) : 0.0;
    const double se_c = std::sqrt(sigma2 * n / det);
    const double se_chi0 = std::sqrt(sigma2 * sx2 / det);

    FitResult out;
    out.parameters["C"] = c;
    out.parameters["chi0"] = chi0;
    out.standard_errors["C"] = se_c;
    out.standard_errors["chi0"] = se_chi0;
    out.residual_norm = std::sqrt(rss);
    if (c > 0.0) {
        const double g = g_parallel_from_curie(c, concentration_x);
        out.parameters["g_parallel"] = g;
        out.standard_errors["g_parallel"] = se_c * g / (2.0 * c);
        out.model_description = "chi = C/T + chi0; g_parallel from C = x (g/2)^2 / 3";
    } else {
        out.model_description =
            "chi = C/T + chi0; unphysical: negative Curie constant, no g_parallel";
    }
    return out;
}

std::vector<double> interpolate_monotone_cubic(std::span<const double> xs,
                                               std::span<const double> ys,
                                               std::span<const double> xq) {
    const int n = static_cast<int>(xs.size());
    if (n < 2 || ys.size() != xs.size())
        throw std::invalid_argument("interpolation needs matching xs/ys, n >= 2");
    std::vector<double> h(n - 1), slope(n - 1), d(n);
    for (int i = 0; i < n - 1; ++i) {
        h[i] = xs[i + 1] - xs[i];
        if (!(h[i] > 0.0)) throw std::invalid_argument("xs must be strictly increasing");
        slope[i] = (ys[i + 1] - ys[i]) / h[i];
    }
    // Fritsch-Carlson tangents
    d[0] = slope[0];
    d[n - 1] = slope[n - 2];
    for (int i = 1; i < n - 1; ++i) {
        if (slope[i - 1] * slope[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
        }
    }
    std::vector<double> out;
    out.reserve(xq.size());
    for (double x : xq) {
        const double xc = std::clamp(x, xs[0], xs[n - 1]);
        int i = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), xc) -
                                 xs.begin()) - 1;
        i = std::clamp(i, 0, n - 2);
        const double t = (xc - xs[i]) / h[i];
        const double t2 = t * t, t3 = t2 * t;
        out.push_back(ys[i] * (2 * t3 - 3 * t2 + 1) + h[i] * d[i] * (t3 - 2 * t2 + t) +
                      ys[i + 1] * (-2 * t3 + 3 * t2) + h[i] * d[i + 1] * (t3 - t2));
    }
    return out;
}

namespace {

struct CrossingChannel {
    double abs_m = 0.0;
    double field_T = 0.0;
    int group = 0; // index into material.groups
};

// equilibrium model value of the whole sample spectrum at one field: the
// resonant channel plus every off-resonant tail and coincident group
double model_value(const Material& material, double field_T, double temperature_K) {
    int total_mult = 0;
    for (const auto& g : material.groups) total_mult += g.multiplicity;
    double v = 0.0;
    for (const auto& group : material.groups) {
        for (const auto& comp : material.distribution.components()) {
            SpinSpecies s = group;
            s.gap_delta = comp.gap_K;
            const double w =
                static_cast<double>(group.multiplicity) / total_mult * comp.weight;
            v += w * chi_isolated(s, Populations::boltzmann(s, field_T, temperature_K),
                                  field_T);
        }
    }
    return v;
}

// the resonant apical channel's own share of that value
double resonant_value(const Material& material, int apical, double abs_m,
                      double field_T, double temperature_K) {
    int total_mult = 0;
    for (const auto& g : material.groups) total_mult += g.multiplicity;
    const auto& group = material.groups[apical];
    double v = 0.0;
    for (const auto& comp : material.distribution.components()) {
        SpinSpecies s = group;
        s.gap_delta = comp.gap_K;
        const auto pops = Populations::boltzmann(s, field_T, temperature_K);
        const double diff = pops.probability(s, {-abs_m, Branch::minus}) -
                            pops.probability(s, {-abs_m, Branch::plus});
        const double e = std::hypot(block_bias(s, -abs_m, field_T), comp.gap_K);
        const double w =
            static_cast<double>(group.multiplicity) / total_mult * comp.weight;
        v += w * s.effective_moment() * s.effective_moment() * diff * comp.gap_K *
             comp.gap_K / (e * e * e);
    }
    return v;
}

} // namespace

PopulationInference infer_populations(const PeakSet& peaks, const Material& material) {
    if (peaks.peaks.empty()) throw FitError("no peaks to assign");
    if (material.groups.empty()) throw FitError("material has no species groups");

    // the group with the largest projection carries the main peaks
    int apical = 0;
    for (int g = 1; g < static_cast<int>(material.groups.size()); ++g)
        if (material.groups[g].projection > material.groups[apical].projection)
            apical = g;
    const SpinSpecies& ap = material.groups[apical];
    const double spacing = ap.hyperfine_A / (ap.effective_moment() * k_conv);
    const double tol = 0.45 * spacing;

    int total_mult = 0;
    for (const auto& g : material.groups) total_mult += g.multiplicity;
    const double delta_eff = material.distribution.effective_gap_K();
    const double w_apical = static_cast<double>(ap.multiplicity) / total_mult;

    // positive-field crossing channels per group
    std::vector<std::vector<CrossingChannel>> group_channels(material.groups.size());
    for (int g = 0; g < static_cast<int>(material.groups.size()); ++g) {
        const auto& sp = material.groups[g];
        const double sp_spacing = sp.hyperfine_A / (sp.effective_moment() * k_conv);
        for (double m = 0.5; m <= sp.nuclear_I + 1e-9; m += 1.0)
            group_channels[g].push_back({m, m * sp_spacing, g});
    }

    PopulationInference out;
    std::vector<CrossingChannel> assigned;
    std::vector<double> heights;
    int skipped_secondary = 0;
    for (const auto& peak : peaks.peaks) {
        const double b = std::abs(peak.field_T);
        const CrossingChannel* best = nullptr;
        double best_d = tol;
        for (const auto& ch : group_channels[apical]) {
            const double dd = std::abs(ch.field_T - b);
            if (dd < best_d) {
                best_d = dd;
                best = &ch;
            }
        }
        if (!best) {
            // a peak belonging only to a secondary group is excluded
            bool secondary = false;
            for (int g = 0; g < static_cast<int>(material.groups.size()); ++g) {
                if (g == apical) continue;
                for (const auto& ch : group_channels[g])
                    if (std::abs(ch.field_T - b) < tol) secondary = true;
            }
            if (secondary) {
                ++skipped_secondary;
                continue;
            }
            throw FitError("unassignable peak at " + fmt(b * 1e3) + " mT");
        }
        assigned.push_back(*best);
        heights.push_back(peak.height);
        out.channels.push_back({best->abs_m, best->field_T, peak.height, 0.0});
    }
    const int nc = static_cast<int>(assigned.size());
    if (nc == 0) throw FitError("no peaks assignable to the main-group crossings");

    // fit one equilibrium temperature to the log height ratios against the
    // full model value at each crossing (tails and coincident groups included)
    double t_best = std::numeric_limits<double>::infinity();
    double f_best = std::numeric_limits<double>::infinity();
    auto objective = [&](double t) {
        double f = 0.0;
        const double ref_meas = std::log(heights[0]);
        const double ref_model = std::log(model_value(material, assigned[0].field_T, t));
        for (int i = 1; i < nc; ++i) {
            const double r =
                (std::log(heights[i]) - ref_meas) -
                (std::log(model_value(material, assigned[i].field_T, t)) - ref_model);
            f += r * r;
        }
        return f;
    };
    constexpr double t_lo = 5e-3, t_hi = 1e4;
    if (nc >= 2) {
        const int n_scan = 241;
        int best_i = 0;
        std::vector<double> ts(n_scan), fs(n_scan);
        for (int i = 0; i < n_scan; ++i) {
            ts[i] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n_scan - 1));
            fs[i] = objective(ts[i]);
            if (fs[i] < fs[best_i]) best_i = i;
        }
        double lo = ts[std::max(best_i - 1, 0)], hi = ts[std::min(best_i + 1, n_scan - 1)];
        constexpr double gr = 0.6180339887498949;
        double a = lo, b = hi, c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        for (int it = 0; it < 120; ++it) {
            if (objective(c1) < objective(c2)) b = c2;
            else a = c1;
            c1 = b - gr * (b - a);
            c2 = a + gr * (b - a);
        }
        t_best = 0.5 * (a + b);
        f_best = objective(t_best);
        // the uniform-population limit: the boundary does at least as well
        if (best_i == n_scan - 1 || t_best > 0.999 * t_hi ||
            objective(t_hi) <= f_best * (1.0 + 1e-9)) {
            t_best = std::numeric_limits<double>::infinity();
            f_best = objective(t_hi);
        }
    } else {
        f_best = 0.0;
    }

    out.effective_temperature_K = t_best;
    out.log_residual_norm = std::sqrt(f_best);

    // standard error from the curvature of the objective
    if (std::isfinite(t_best) && nc > 2) {
        const double dt = 1e-3 * t_best;
        const double f2 = (objective(t_best + dt) - 2.0 * f_best +
                           objective(t_best - dt)) / (dt * dt);
        const double sigma2 = f_best / (nc - 2);
        out.effective_temperature_se_K =
            f2 > 0.0 ? std::sqrt(2.0 * sigma2 / f2) : std::numeric_limits<double>::infinity();
    } else {
        out.effective_temperature_se_K = std::isfinite(t_best)
                                             ? 0.0
                                             : std::numeric_limits<double>::infinity();
    }

    // invert heights into per-channel population differences through the
    // modeled resonant share (strips tails and coincident secondary channels)
    const double t_share = std::isfinite(t_best) ? t_best : t_hi;
    for (int i = 0; i < nc; ++i) {
        const double share =
            resonant_value(material, apical, assigned[i].abs_m, assigned[i].field_T,
                           t_share) /
            model_value(material, assigned[i].field_T, t_share);
        const double corrected = heights[i] * share;
        out.channels[i].peak_height = corrected;
        out.channels[i].population_difference =
            corrected * delta_eff /
            (w_apical * ap.effective_moment() * ap.effective_moment());
    }

    // equilibrium heights decline with field, so a rising trend marks
    // non-equilibrium populations
    if (nc >= 2) {
        double sx = 0.0, sy = 0.0, sxy = 0.0, sx2 = 0.0;
        for (int i = 0; i < nc; ++i) {
            const double y = std::log(out.channels[i].population_difference);
            sx += i;
            sy += y;
            sxy += i * y;
            sx2 += static_cast<double>(i) * i;
        }
        out.equilibrium_violating = (nc * sxy - sx * sy) > 0.0;
    }

    std::ostringstream d;
    if (!std::isfinite(t_best))
        d << "uniform-population limit (effective temperature unbounded)";
    else
        d << "effective temperature " << t_best << " K from log height ratios";
    if (out.equilibrium_violating)
        d << "; heights increase with field: equilibrium-violating ordering";
    if (skipped_secondary > 0)
        d << "; " << skipped_secondary << " secondary-group peak(s) excluded";
    out.description = d.str();
    return out;
}

} // namespace spinchi
