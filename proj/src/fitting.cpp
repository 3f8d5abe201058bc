#include "emiscan/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace emiscan::fitting {

namespace {

double median(Eigen::ArrayXd v) {
  std::sort(v.data(), v.data() + v.size());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Parameter vector layout: (omega0, gamma, amplitude, x_offset, y_offset).
constexpr int kNumParams = 5;

struct ModelEval {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double cost{0.0};
};

ModelEval evaluate(const lockin::SweepRecord& record, const Eigen::VectorXd& p, bool use_x,
                   bool use_y) {
  const auto n = record.omegas.size();
  const int rows = static_cast<int>(n) * ((use_x ? 1 : 0) + (use_y ? 1 : 0));
  ModelEval ev;
  ev.residual.resize(rows);
  ev.jacobian.resize(rows, kNumParams);

  const double w0 = p[0];
  const double h = p[1] / 2.0;
  const double a = p[2];
  int row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = record.omegas[i] - w0;
    const double den = d * d + h * h;
    if (use_x) {
      const double model = a * h * h / den + p[3];
      ev.residual[row] = record.x[i] - model;
      ev.jacobian(row, 0) = 2.0 * a * h * h * d / (den * den);
      ev.jacobian(row, 1) = a * h * d * d / (den * den); // d/dgamma = d/dh / 2
      ev.jacobian(row, 2) = h * h / den;
      ev.jacobian(row, 3) = 1.0;
      ev.jacobian(row, 4) = 0.0;
      ++row;
    }
    if (use_y) {
      const double model = a * h * d / den + p[4];
      ev.residual[row] = record.y[i] - model;
      ev.jacobian(row, 0) = -a * h * (h * h - d * d) / (den * den);
      ev.jacobian(row, 1) = 0.5 * a * d * (d * d - h * h) / (den * den);
      ev.jacobian(row, 2) = h * d / den;
      ev.jacobian(row, 3) = 0.0;
      ev.jacobian(row, 4) = 1.0;
      ++row;
    }
  }
  ev.cost = ev.residual.squaredNorm();
  return ev;
}

struct LmOutcome {
  Eigen::VectorXd p;
  double cost{0.0};
  int iterations{0};
  bool converged{false};
};

// Parameter scale for relative step sizes: frequencies against the linewidth,
// voltages against the amplitude, so zero-valued offsets can still converge.
double param_scale(const Eigen::VectorXd& p, int k) {
  const double characteristic = k < 2 ? std::abs(p[1]) : std::abs(p[2]);
  return std::max(std::abs(p[k]), characteristic) + 1e-300;
}

LmOutcome levenberg_marquardt(const lockin::SweepRecord& record, Eigen::VectorXd p, bool use_x,
                              bool use_y, const FitOptions& options) {
  double lambda = 1e-3;
  ModelEval ev = evaluate(record, p, use_x, use_y);
  LmOutcome out;
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    const Eigen::MatrixXd jtj = ev.jacobian.transpose() * ev.jacobian;
    const Eigen::VectorXd jtr = ev.jacobian.transpose() * ev.residual;

    bool accepted = false;
    Eigen::VectorXd step;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (int k = 0; k < kNumParams; ++k) {
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);
      }
      step = damped.ldlt().solve(jtr);
      // a vanishing proposal means the optimum is already reached; cost can
      // no longer improve at machine precision, so stop here
      double proposal_rel = 0.0;
      for (int k = 0; k < kNumParams; ++k) {
        proposal_rel = std::max(proposal_rel, std::abs(step[k]) / param_scale(p, k));
      }
      if (proposal_rel < options.tolerance) {
        out.converged = true;
        break;
      }
      const Eigen::VectorXd trial = p + step;
      if (trial[1] > 0.0 && trial.allFinite()) {
        const ModelEval trial_ev = evaluate(record, trial, use_x, use_y);
        if (trial_ev.cost <= ev.cost) {
          p = trial;
          ev = trial_ev;
          lambda = std::max(lambda / 10.0, 1e-14);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (out.converged || !accepted) {
      break;
    }
    double max_rel = 0.0;
    for (int k = 0; k < kNumParams; ++k) {
      max_rel = std::max(max_rel, std::abs(step[k]) / param_scale(p, k));
    }
    if (max_rel < options.tolerance) {
      out.converged = true;
      ++out.iterations;
      break;
    }
  }
  out.p = p;
  out.cost = ev.cost;
  return out;
}

} // namespace

magnetometer::ResonanceParams initial_guess(const lockin::SweepRecord& record) {
  const auto n = record.omegas.size();
  magnetometer::ResonanceParams guess;
  guess.x_offset = median(record.x);
  guess.y_offset = median(record.y);

  Eigen::Index peak = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (record.x[i] > record.x[peak]) { // strict: ties keep the lower frequency
      peak = i;
    }
  }
  guess.omega0 = record.omegas[peak];
  guess.amplitude = std::max(record.x.maxCoeff() - guess.x_offset, 0.0);

  const double span = record.omegas[n - 1] - record.omegas[0];
  const double level = guess.x_offset + guess.amplitude / 2.0;
  double left = std::nan("");
  double right = std::nan("");
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const bool below = record.x[i] < level;
    const bool above = record.x[i + 1] >= level;
    if (below && above && std::isnan(left)) {
      const double f = (level - record.x[i]) / (record.x[i + 1] - record.x[i]);
      left = record.omegas[i] + f * (record.omegas[i + 1] - record.omegas[i]);
    }
    if (record.x[i] >= level && record.x[i + 1] < level) {
      const double f = (record.x[i] - level) / (record.x[i] - record.x[i + 1]);
      right = record.omegas[i] + f * (record.omegas[i + 1] - record.omegas[i]);
    }
  }
  guess.gamma_fwhm = (std::isnan(left) || std::isnan(right) || right <= left)
                         ? span / 3.0
                         : right - left;
  return guess;
}

FitResult fit_resonance(const lockin::SweepRecord& record, const FitOptions& options) {
  const auto n = record.omegas.size();
  if (n < 5) {
    throw DegenerateSweep("fit needs at least 5 sweep points");
  }
  const magnetometer::ResonanceParams g = initial_guess(record);
  const double span = record.omegas[n - 1] - record.omegas[0];
  if (span < 2.0 * g.gamma_fwhm) {
    throw DegenerateSweep("sweep spans fewer than two estimated linewidths");
  }

  Eigen::VectorXd p(kNumParams);
  p << g.omega0, g.gamma_fwhm, g.amplitude, g.x_offset, g.y_offset;

  FitResult result;
  if (options.joint) {
    const LmOutcome out = levenberg_marquardt(record, p, true, true, options);
    p = out.p;
    result.converged = out.converged;
    result.iterations = out.iterations;
    result.residual_rms = std::sqrt(out.cost / (2.0 * static_cast<double>(n)));
  } else {
    // independent fits: the Lorentzian X channel sets the shared
    // parameters, the dispersive Y fit supplies the Y offset
    const LmOutcome out_x = levenberg_marquardt(record, p, true, false, options);
    Eigen::VectorXd py = out_x.p;
    const LmOutcome out_y = levenberg_marquardt(record, py, false, true, options);
    p = out_x.p;
    p[4] = out_y.p[4];
    result.converged = out_x.converged && out_y.converged;
    result.iterations = out_x.iterations + out_y.iterations;
    result.residual_rms = std::sqrt((out_x.cost + out_y.cost) / (2.0 * static_cast<double>(n)));
  }

  result.params.omega0 = p[0];
  result.params.gamma_fwhm = p[1];
  result.params.amplitude = p[2];
  result.params.x_offset = p[3];
  result.params.y_offset = p[4];

  // reject spurious lines narrower than the sweep sampling
  const double spacing = span / static_cast<double>(n - 1);
  if (result.params.gamma_fwhm < spacing || !std::isfinite(result.residual_rms)) {
    result.converged = false;
  }

  result.r_peak = result.params.amplitude;
  const auto [r, phi] = r_phi(result.params, result.params.omega0, options.phase_order_xy);
  (void)r;
  result.phi_peak = phi;
  return result;
}

std::pair<double, double> r_phi(const magnetometer::ResonanceParams& params, double omega,
                                bool phase_order_xy) {
  const double d = omega - params.omega0;
  const double h = params.gamma_fwhm / 2.0;
  const double den = d * d + h * h;
  const double x = params.amplitude * h * h / den;
  const double y = params.amplitude * h * d / den;
  if (x == 0.0 && y == 0.0) {
    throw UndefinedPhase("both quadratures vanish");
  }
  const double r = std::sqrt(x * x + y * y);
  const double phi = phase_order_xy ? std::atan2(x, y) : std::atan2(y, x);
  return {r, phi};
}

} // namespace emiscan::fitting
