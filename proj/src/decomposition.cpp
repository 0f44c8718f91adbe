#include "nvoptics/decomposition.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nvoptics/absorption.hpp"
#include "nvoptics/errors.hpp"

namespace nvoptics {

void ComponentModel::validate() const {
    if (!(fit_window_nm[0] < fit_window_nm[1])) {
        throw ValidationError("fit window must satisfy lo < hi");
    }
    for (const auto& g : gaussians) {
        if (!(g.fwhm_nm > 0.0)) {
            throw ValidationError("gaussian fwhm must be positive");
        }
        if (g.center_nm < fit_window_nm[0] || g.center_nm > fit_window_nm[1]) {
            std::ostringstream os;
            os << "gaussian center " << g.center_nm << " nm lies outside the fit window ["
               << fit_window_nm[0] << ", " << fit_window_nm[1] << "]";
            throw ValidationError(os.str());
        }
    }
    if (ramp_form == RampForm::PowerLaw && !(ramp_exponent > 0.0)) {
        throw ValidationError("ramp exponent must be positive");
    }
    if (ramp_form == RampForm::Exponential && !(ramp_tau_nm > 0.0)) {
        throw ValidationError("ramp decay length must be positive");
    }
    if (!(ramp_ref_nm > 0.0)) {
        throw ValidationError("ramp reference wavelength must be positive");
    }
    if (reference_spectrum) {
        if (reference_spectrum->kind() != SpectrumKind::AbsorptionCoefficient) {
            throw ValidationError("reference spectrum must be an absorption spectrum");
        }
        const auto& g = reference_spectrum->grid();
        if (g.front() > fit_window_nm[0] || g.back() < fit_window_nm[1]) {
            std::ostringstream os;
            os << "reference spectrum covers [" << g.front() << ", " << g.back()
               << "] nm but the fit window is [" << fit_window_nm[0] << ", " << fit_window_nm[1]
               << "]";
            throw ValidationError(os.str());
        }
    }
    for (const auto& m : masks) {
        if (!(m[0] < m[1])) {
            throw ValidationError("mask interval must satisfy lo < hi");
        }
    }
}

std::vector<std::string> component_names(const ComponentModel& model) {
    std::vector<std::string> names;
    names.reserve(model.component_count());
    for (const auto& g : model.gaussians) {
        names.push_back("c" + std::to_string(static_cast<long long>(std::llround(g.center_nm))));
    }
    names.push_back("c_ramp");
    names.push_back("c_offset");
    return names;
}

std::vector<double> gaussian_band(double center_nm, double fwhm_nm, const WavelengthGrid& grid) {
    if (!(fwhm_nm > 0.0)) {
        throw ValidationError("gaussian fwhm must be positive");
    }
    const double k = 4.0 * std::log(2.0) / (fwhm_nm * fwhm_nm);
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid[i] - center_nm;
        out[i] = std::exp(-k * d * d);
    }
    return out;
}

std::vector<double> ramp_component(double p, double lambda0_nm, const WavelengthGrid& grid) {
    if (!(p > 0.0)) {
        throw ValidationError("ramp exponent must be positive");
    }
    if (!(lambda0_nm > 0.0)) {
        throw ValidationError("ramp reference wavelength must be positive");
    }
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = std::pow(grid[i] / lambda0_nm, -p);
    }
    return out;
}

std::vector<double> exponential_ramp(double tau_nm, double lambda0_nm,
                                     const WavelengthGrid& grid) {
    if (!(tau_nm > 0.0)) {
        throw ValidationError("ramp decay length must be positive");
    }
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[i] = std::exp(-(grid[i] - lambda0_nm) / tau_nm);
    }
    return out;
}

std::vector<double> resample_reference(const Spectrum& ref, const WavelengthGrid& grid) {
    const auto& w = ref.grid().values();
    const auto& v = ref.values();
    if (grid.front() < w.front() || grid.back() > w.back()) {
        std::ostringstream os;
        os << "reference covers [" << w.front() << ", " << w.back()
           << "] nm; grid requires [" << grid.front() << ", " << grid.back() << "]";
        throw ValidationError(os.str());
    }
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        auto it = std::lower_bound(w.begin(), w.end(), x);
        if (it != w.end() && *it == x) {
            out[i] = v[static_cast<std::size_t>(it - w.begin())];
            continue;
        }
        const std::size_t j = static_cast<std::size_t>(it - w.begin());
        const double t = (x - w[j - 1]) / (w[j] - w[j - 1]);
        out[i] = v[j - 1] + t * (v[j] - v[j - 1]);
    }
    return out;
}

std::vector<std::vector<double>> component_columns(const ComponentModel& model,
                                                   const WavelengthGrid& grid) {
    std::vector<std::vector<double>> cols;
    cols.reserve(model.component_count());
    for (const auto& g : model.gaussians) {
        cols.push_back(gaussian_band(g.center_nm, g.fwhm_nm, grid));
    }
    cols.push_back(model.ramp_form == RampForm::PowerLaw
                       ? ramp_component(model.ramp_exponent, model.ramp_ref_nm, grid)
                       : exponential_ramp(model.ramp_tau_nm, model.ramp_ref_nm, grid));
    if (model.reference_spectrum) {
        cols.push_back(resample_reference(*model.reference_spectrum, grid));
    } else {
        cols.push_back(std::vector<double>(grid.size(), 1.0));
    }
    return cols;
}

namespace {

Eigen::VectorXd nnls_impl(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const Eigen::Index n = A.cols();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);

    const double grad_scale = (A.transpose() * b).cwiseAbs().maxCoeff();
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * grad_scale;

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        }
        Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
        Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
        z.setZero();
        for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[static_cast<Eigen::Index>(k)];
    };

    const int max_outer = 30 * static_cast<int>(n) + 10;
    for (int outer = 0; outer < max_outer; ++outer) {
        const Eigen::VectorXd w = A.transpose() * (b - A * x);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
                best_w = w[j];
                best = j;
            }
        }
        if (best < 0) return x;  // KKT satisfied
        passive[static_cast<std::size_t>(best)] = true;

        Eigen::VectorXd z(n);
        for (int inner = 0; inner < max_outer; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
                    feasible = false;
                    break;
                }
            }
            if (feasible) {
                x = z;
                break;
            }
            double alpha = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
                }
            }
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x[j] <= 0.0) {
                    x[j] = 0.0;
                    passive[static_cast<std::size_t>(j)] = false;
                }
            }
        }
    }
    throw NumericalError("non-negative least squares did not converge");
}

struct FitProblem {
    std::vector<std::size_t> window_idx;    // grid indices inside the fit window
    std::vector<std::size_t> unmasked_idx;  // subset also outside every mask
    WavelengthGrid window_grid;
};

bool in_any_mask(double lambda, const std::vector<std::array<double, 2>>& masks) {
    for (const auto& m : masks) {
        if (lambda >= m[0] && lambda <= m[1]) return true;
    }
    return false;
}

FitProblem select_points(const Spectrum& s, const ComponentModel& model) {
    const auto& w = s.grid().values();
    if (w.front() > model.fit_window_nm[0] || w.back() < model.fit_window_nm[1]) {
        std::ostringstream os;
        os << "spectrum covers [" << w.front() << ", " << w.back()
           << "] nm but the fit window is [" << model.fit_window_nm[0] << ", "
           << model.fit_window_nm[1] << "]";
        throw ValidationError(os.str());
    }
    FitProblem prob{{}, {}, WavelengthGrid({1.0, 2.0})};  // placeholder, replaced below
    std::vector<double> window_lambdas;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < model.fit_window_nm[0] || w[i] > model.fit_window_nm[1]) continue;
        prob.window_idx.push_back(i);
        window_lambdas.push_back(w[i]);
        if (!in_any_mask(w[i], model.masks)) prob.unmasked_idx.push_back(i);
    }
    const std::size_t needed = std::max<std::size_t>(model.component_count(), 2);
    if (prob.unmasked_idx.size() < needed) {
        std::ostringstream os;
        os << "fit needs at least " << needed << " unmasked points in the window, found "
           << prob.unmasked_idx.size();
        throw ValidationError(os.str());
    }
    prob.window_grid = WavelengthGrid(std::move(window_lambdas));
    return prob;
}

// component_columns as an Eigen matrix, with optional Gaussian shape
// overrides for the nonlinear refinement.
Eigen::MatrixXd design_matrix(const ComponentModel& model, const WavelengthGrid& grid,
                              const std::vector<double>* centers = nullptr,
                              const std::vector<double>* fwhms = nullptr) {
    const ComponentModel* use = &model;
    ComponentModel patched;
    if (centers || fwhms) {
        patched = model;
        for (std::size_t j = 0; j < patched.gaussians.size(); ++j) {
            if (centers) patched.gaussians[j].center_nm = (*centers)[j];
            if (fwhms) patched.gaussians[j].fwhm_nm = (*fwhms)[j];
        }
        use = &patched;
    }
    const auto cols = component_columns(*use, grid);
    Eigen::MatrixXd A(static_cast<Eigen::Index>(grid.size()),
                      static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
        }
    }
    return A;
}

void check_conditioning(const Eigen::MatrixXd& A, const ComponentModel& model) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (cond <= 1e10) return;
    auto names = component_names(model);
    std::ostringstream os;
    os << "design matrix is numerically degenerate (condition " << cond
       << "); pairwise component correlations:";
    for (Eigen::Index i = 0; i < A.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < A.cols(); ++j) {
            const double denom = A.col(i).norm() * A.col(j).norm();
            const double corr = denom > 0.0 ? A.col(i).dot(A.col(j)) / denom : 0.0;
            os << ' ' << names[static_cast<std::size_t>(i)] << '~'
               << names[static_cast<std::size_t>(j)] << ": " << corr << ';';
        }
    }
    throw NumericalError(os.str());
}

struct LinearFitOutput {
    std::vector<double> coefficients;
    Spectrum residual;
    double rms = 0.0;
};

LinearFitOutput linear_fit(const Spectrum& s, const ComponentModel& model, const FitProblem& prob,
                           const std::vector<double>* centers, const std::vector<double>* fwhms) {
    WavelengthGrid fit_grid = [&] {
        std::vector<double> lam;
        lam.reserve(prob.unmasked_idx.size());
        for (auto i : prob.unmasked_idx) lam.push_back(s.grid()[i]);
        return WavelengthGrid(std::move(lam));
    }();
    Eigen::MatrixXd A = design_matrix(model, fit_grid, centers, fwhms);
    check_conditioning(A, model);
    Eigen::VectorXd b(static_cast<Eigen::Index>(prob.unmasked_idx.size()));
    for (std::size_t k = 0; k < prob.unmasked_idx.size(); ++k) {
        b[static_cast<Eigen::Index>(k)] = s.values()[prob.unmasked_idx[k]];
    }
    Eigen::VectorXd x = nnls_impl(A, b);

    Eigen::MatrixXd F = design_matrix(model, prob.window_grid, centers, fwhms);
    Eigen::VectorXd pred = F * x;
    std::vector<double> res(prob.window_idx.size());
    for (std::size_t k = 0; k < prob.window_idx.size(); ++k) {
        res[k] = s.values()[prob.window_idx[k]] - pred[static_cast<Eigen::Index>(k)];
    }
    const Eigen::VectorXd r_fit = b - A * x;
    LinearFitOutput out{
        std::vector<double>(x.data(), x.data() + x.size()),
        Spectrum(prob.window_grid, std::move(res), SpectrumKind::AbsorptionCoefficient,
                 SpectrumRole::Residual),
        std::sqrt(r_fit.squaredNorm() / static_cast<double>(r_fit.size()))};
    return out;
}

}  // namespace

std::vector<double> nnls_solve(const std::vector<std::vector<double>>& columns,
                               const std::vector<double>& rhs) {
    if (columns.empty()) throw ValidationError("nnls needs at least one column");
    for (const auto& c : columns) {
        if (c.size() != rhs.size()) {
            throw ValidationError("nnls column length does not match rhs length");
        }
    }
    Eigen::MatrixXd A(static_cast<Eigen::Index>(rhs.size()),
                      static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
        }
    }
    Eigen::VectorXd b(static_cast<Eigen::Index>(rhs.size()));
    for (std::size_t i = 0; i < rhs.size(); ++i) b[static_cast<Eigen::Index>(i)] = rhs[i];
    Eigen::VectorXd x = nnls_impl(A, b);
    return std::vector<double>(x.data(), x.data() + x.size());
}

DecompositionResult fit_components(const Spectrum& s, const ComponentModel& model) {
    model.validate();
    if (s.kind() != SpectrumKind::AbsorptionCoefficient) {
        throw ValidationError("fit_components expects an absorption spectrum");
    }
    const FitProblem prob = select_points(s, model);
    auto lin = linear_fit(s, model, prob, nullptr, nullptr);
    DecompositionResult result{std::move(lin.coefficients), std::move(lin.residual), lin.rms, true,
                               std::nullopt};
    return result;
}

DecompositionResult refine_fit(const Spectrum& s, const ComponentModel& model,
                               const DecompositionResult& initial, const RefineBounds& bounds,
                               int max_iter) {
    model.validate();
    if (!initial.converged) {
        throw ValidationError("refine_fit requires a converged initial fit");
    }
    if (!(bounds.center_delta_nm >= 0.0) ||
        !(bounds.fwhm_scale_lo > 0.0 && bounds.fwhm_scale_hi >= bounds.fwhm_scale_lo)) {
        throw ValidationError("refinement bounds are inconsistent");
    }
    const FitProblem prob = select_points(s, model);
    const std::size_t ng = model.gaussians.size();
    if (ng == 0) {
        DecompositionResult out = initial;
        out.refined_shape = RefinedShape{{}, {}, true, 0};
        return out;
    }

    // Parameter vector: gaussian centers then fwhms, box-constrained around
    // the model shapes. Coefficients are not parameters; each objective
    // evaluation re-solves them by the non-negative linear fit (separable
    // least squares).
    std::vector<double> lo(2 * ng), hi(2 * ng), theta(2 * ng);
    for (std::size_t j = 0; j < ng; ++j) {
        theta[j] = model.gaussians[j].center_nm;
        lo[j] = theta[j] - bounds.center_delta_nm;
        hi[j] = theta[j] + bounds.center_delta_nm;
        theta[ng + j] = model.gaussians[j].fwhm_nm;
        lo[ng + j] = theta[ng + j] * bounds.fwhm_scale_lo;
        hi[ng + j] = theta[ng + j] * bounds.fwhm_scale_hi;
    }

    auto split = [&](const std::vector<double>& t) {
        std::vector<double> centers(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(ng));
        std::vector<double> fwhms(t.begin() + static_cast<std::ptrdiff_t>(ng), t.end());
        return std::pair(centers, fwhms);
    };
    auto evaluate = [&](const std::vector<double>& t) {
        auto [centers, fwhms] = split(t);
        return linear_fit(s, model, prob, &centers, &fwhms);
    };
    auto objective = [&](const LinearFitOutput& o) {
        return o.rms * o.rms * static_cast<double>(prob.unmasked_idx.size());
    };
    auto clamp_box = [&](std::vector<double>& t) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::clamp(t[i], lo[i], hi[i]);
    };

    LinearFitOutput best = evaluate(theta);
    const double f_initial = objective(best);
    double f_best = f_initial;

    const std::size_t m = prob.unmasked_idx.size();
    auto fit_residual_on_unmasked = [&](const LinearFitOutput& o) {
        // linear_fit's residual covers the whole window; pull out the rows
        // the objective is defined over.
        Eigen::VectorXd r(static_cast<Eigen::Index>(m));
        std::size_t k = 0;
        for (std::size_t wi = 0; wi < prob.window_idx.size(); ++wi) {
            if (k < m && prob.window_idx[wi] == prob.unmasked_idx[k]) {
                r[static_cast<Eigen::Index>(k)] = o.residual.values()[wi];
                ++k;
            }
        }
        return r;
    };

    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        Eigen::VectorXd r0 = fit_residual_on_unmasked(best);
        Eigen::MatrixXd J(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(2 * ng));
        for (std::size_t p = 0; p < 2 * ng; ++p) {
            const double h = std::max(1e-6, 1e-5 * std::abs(theta[p]));
            std::vector<double> tp = theta;
            tp[p] += h;
            Eigen::VectorXd rp = fit_residual_on_unmasked(evaluate(tp));
            J.col(static_cast<Eigen::Index>(p)) = (rp - r0) / h;
        }
        const Eigen::VectorXd g = J.transpose() * r0;
        if (g.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, f_best)) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            Eigen::MatrixXd M = JtJ;
            for (Eigen::Index d = 0; d < M.rows(); ++d) {
                M(d, d) += lambda * std::max(JtJ(d, d), 1e-12);
            }
            const Eigen::VectorXd delta = M.ldlt().solve(-g);
            std::vector<double> trial = theta;
            for (std::size_t p = 0; p < 2 * ng; ++p) trial[p] += delta[static_cast<Eigen::Index>(p)];
            clamp_box(trial);
            if (trial == theta) {
                lambda *= 4.0;
                continue;
            }
            LinearFitOutput cand = evaluate(trial);
            if (objective(cand) < f_best) {
                theta = std::move(trial);
                best = std::move(cand);
                f_best = objective(best);
                lambda /= 3.0;
                stepped = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped) {
            // No downhill step at any damping: treat the current point as
            // the bounded optimum.
            converged = true;
            break;
        }
    }

    auto [centers, fwhms] = split(theta);
    if (!converged || f_best > f_initial) {
        DecompositionResult out = initial;
        out.refined_shape = RefinedShape{centers, fwhms, false, iter};
        return out;
    }
    DecompositionResult out{std::move(best.coefficients), std::move(best.residual), best.rms, true,
                            RefinedShape{centers, fwhms, true, iter}};
    return out;
}

double p1_concentration(double c270, double kappa_ppm_cm) {
    if (!(kappa_ppm_cm > 0.0)) {
        throw ValidationError("P1 calibration factor must be positive");
    }
    if (!(c270 >= 0.0)) {
        throw ValidationError("270 nm amplitude must be non-negative");
    }
    return kappa_ppm_cm * c270;
}

FeatureReport residual_features(const DecompositionResult& result) {
    const Spectrum& r = result.residual;
    FeatureReport report;

    const auto& w = r.grid().values();
    const auto& v = r.values();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < 650.0 || w[i] > 800.0) continue;
        sx += w[i];
        sy += v[i];
        sxx += w[i] * w[i];
        sxy += w[i] * v[i];
        ++n;
    }
    if (n >= 2) {
        const double denom = static_cast<double>(n) * sxx - sx * sx;
        if (denom > 0.0) {
            report.rise_650_800_slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
        }
    }
    report.gr1_metric = try_band_integral(r, 500.0, 750.0);
    report.nv_band_metric = try_band_integral(r, 400.0, 650.0);
    return report;
}

}  // namespace nvoptics
