#include "locrom/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace locrom {

SurrogateErrorModel::SurrogateErrorModel(const Surrogate& s) : s_(s) {
  if (s.input_dim() != 3) {
    throw Error("SurrogateErrorModel: surrogate must take features (mu0, mu, k)");
  }
}

double SurrogateErrorModel::log_error(double mu0, double mu, int k) const {
  Vector z(3);
  z << mu0, mu, static_cast<double>(k);
  return s_.predict(z);
}

bool violates(const ErrorModel& model, double mu0, double mu, int k, double log_threshold) {
  if (!(mu0 > 0.0)) return true;
  const double v = model.log_error(mu0, mu, k);
  return !(v < log_threshold);
}

namespace {

struct Walk {
  int satisfied = 0;      // grid probes passed before stopping
  bool violated = false;  // stopped on a violating probe
  double edge = 0.0;      // last satisfying location
};

// Probes mu + dir * i * step for i = 1..n. On the way down, the first grid
// probe below `floor` is replaced by a probe at floor itself.
Walk walk(const ErrorModel& model, double mu, int dim, double log_thr, double step, int n, int dir,
          double floor = -std::numeric_limits<double>::infinity()) {
  Walk w;
  w.edge = mu;
  for (int i = 1; i <= n; ++i) {
    const double probe = mu + dir * i * step;
    if (probe < floor) {
      if (w.edge > floor) {
        if (violates(model, floor, mu, dim, log_thr)) {
          w.violated = true;
        } else {
          w.edge = floor;
        }
      }
      return w;
    }
    if (violates(model, probe, mu, dim, log_thr)) {
      w.violated = true;
      return w;
    }
    w.satisfied = i;
    w.edge = probe;
  }
  return w;
}

int probe_count(double radius, double step) {
  return std::max(1, static_cast<int>(std::floor(radius / step + 1e-9)));
}

}  // namespace

FeasibleInterval find_feasible_interval(const ErrorModel& model, double mu, int dim,
                                        double threshold, double probe_step, double max_radius) {
  if (!(threshold > 0.0) || !(probe_step > 0.0) || !(max_radius >= 0.0)) {
    std::ostringstream msg;
    msg << "find_feasible_interval: need threshold > 0, probe_step > 0, max_radius >= 0 (got "
        << threshold << ", " << probe_step << ", " << max_radius << ")";
    throw Error(msg.str());
  }
  const double log_thr = std::log(threshold);
  if (violates(model, mu, mu, dim, log_thr)) {
    std::ostringstream msg;
    msg << "find_feasible_interval: center mu=" << mu << " already violates threshold "
        << threshold << " at dim " << dim;
    throw InfeasibleCenter(msg.str());
  }
  const int n = probe_count(max_radius, probe_step);
  const Walk right = walk(model, mu, dim, log_thr, probe_step, n, +1);
  const Walk left = walk(model, mu, dim, log_thr, probe_step, n, -1);
  return FeasibleInterval{mu, left.edge, right.edge, threshold, dim};
}

void MapConfig::validate() const {
  const bool ok = A < B && delta_s > 0.0 && r0 > 0.0 && eps0 > 0.0 && beta1 > 1.0 &&
                  beta2 > 0.0 && beta2 < 1.0 && beta3 > 1.0 && dim >= 1 && max_iterations > 0 &&
                  max_repairs >= 0 && max_bisections >= 0 && mu_start >= A && mu_start <= B;
  if (!ok) {
    std::ostringstream msg;
    msg << "invalid map config: A=" << A << " B=" << B << " eps0=" << eps0
        << " delta_s=" << delta_s << " r0=" << r0 << " dim=" << dim << " beta=(" << beta1 << ", "
        << beta2 << ", " << beta3 << ") mu_start=" << mu_start;
    throw Error(msg.str());
  }
}

ParametricMap build_map(const ErrorModel& model, const MapConfig& cfg) {
  cfg.validate();
  ParametricMap map;
  map.config = cfg;

  double mu = cfg.mu_start;
  double eps = cfg.eps0;
  double r = cfg.r0;
  // Left edge the next interval must reach. The domain's right end plays
  // this role for the first interval.
  double prev_left = cfg.B;
  int repairs = 0;

  for (int iter = 0;; ++iter) {
    if (iter >= cfg.max_iterations) {
      std::ostringstream msg;
      msg << "build_map: no termination after " << cfg.max_iterations << " iterations ("
          << map.intervals.size() << " intervals built, current center " << mu
          << ", threshold " << eps << ")";
      throw MapIncomplete(msg.str(), map);
    }
    const double log_thr = std::log(eps);
    const int n = probe_count(r, cfg.delta_s);

    if (violates(model, mu, mu, cfg.dim, log_thr)) {
      eps *= cfg.beta1;
      r *= cfg.beta2;
      continue;
    }
    const Walk right = walk(model, mu, cfg.dim, log_thr, cfg.delta_s, n, +1);
    if (right.violated && right.satisfied == 0) {
      eps *= cfg.beta1;
      r *= cfg.beta2;
      continue;
    }
    const double d_right = right.edge;
    if (d_right < prev_left) {
      if (++repairs > cfg.max_repairs) {
        std::ostringstream msg;
        msg << "build_map: overlap repair failed " << cfg.max_repairs << " times at center " << mu
            << " (right edge " << d_right << " < required " << prev_left << ")";
        throw MapIncomplete(msg.str(), map);
      }
      mu = 0.5 * (mu + prev_left);
      continue;
    }

    const Walk left = walk(model, mu, cfg.dim, log_thr, cfg.delta_s, n, -1, cfg.A);
    if (left.violated && left.satisfied == 0) {
      eps *= cfg.beta1;
      r *= cfg.beta2;
      continue;
    }
    const double d_left = left.edge;
    map.intervals.push_back(FeasibleInterval{mu, d_left, d_right, eps, cfg.dim});
    repairs = 0;
    if (d_left <= cfg.A) break;

    double next = std::max(mu - cfg.beta3 * left.satisfied * cfg.delta_s, cfg.A);
    int bisections = 0;
    while (violates(model, d_left, next, cfg.dim, log_thr)) {
      if (++bisections > cfg.max_bisections) {
        next = d_left;
        break;
      }
      next = 0.5 * (next + d_left);
    }
    r = std::max(r, d_left - next);
    prev_left = d_left;
    mu = next;
  }
  return map;
}

std::vector<RankedBasis> rank_bases(const ErrorModel& model, double query_mu,
                                    std::span<const double> candidate_mus, int dim) {
  std::vector<RankedBasis> out;
  out.reserve(candidate_mus.size());
  for (double mu : candidate_mus) out.push_back({mu, model.log_error(query_mu, mu, dim)});
  std::stable_sort(out.begin(), out.end(), [&](const RankedBasis& a, const RankedBasis& b) {
    if (a.predicted_log_error != b.predicted_log_error) {
      return a.predicted_log_error < b.predicted_log_error;
    }
    const double da = std::abs(a.mu - query_mu), db = std::abs(b.mu - query_mu);
    if (da != db) return da < db;
    return a.mu < b.mu;
  });
  return out;
}

DimensionModel dimension_model(const Surrogate& s) {
  if (s.input_dim() != 2) {
    throw Error("dimension_model: surrogate must take features (mu, log eps)");
  }
  return [&s](double mu, double target_log_eps) {
    Vector z(2);
    z << mu, target_log_eps;
    return s.predict(z);
  };
}

int predict_dimension(const DimensionModel& model, double mu, double target_log_eps) {
  const double v = model(mu, target_log_eps);
  if (std::isnan(v)) {
    throw Error("predict_dimension: model returned NaN");
  }
  const double clamped = std::clamp(v, static_cast<double>(kMinBasisDim),
                                    static_cast<double>(kMaxBasisDim));
  return static_cast<int>(std::lround(clamped));
}

SpectrumRule parse_spectrum_rule(const std::string& name) {
  if (name == "largest_removed") return SpectrumRule::largest_removed;
  if (name == "tail") return SpectrumRule::tail;
  throw Error("unknown spectrum rule '" + name + "' (expected largest_removed or tail)");
}

std::string to_string(SpectrumRule rule) {
  return rule == SpectrumRule::tail ? "tail" : "largest_removed";
}

SpectrumEstimate spectrum_dimension_baseline(const Vector& sigma, double target_eps,
                                             SpectrumRule rule, bool on_squares) {
  const int n = static_cast<int>(sigma.size());
  if (n == 0) {
    throw Error("spectrum_dimension_baseline: empty spectrum");
  }
  // tail[k] = discarded part when the first k modes are kept
  std::vector<double> tail(n + 1, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    tail[i] = tail[i + 1] + (on_squares ? sigma(i) * sigma(i) : sigma(i));
  }
  // Keeping every mode discards nothing, so reaching the full rank means the
  // spectrum could not certify the target with any real truncation.
  for (int k = 1; k < n; ++k) {
    double t = sigma(k);
    if (rule == SpectrumRule::tail) t = on_squares ? std::sqrt(tail[k]) : tail[k];
    if (t <= target_eps) return {k, false};
  }
  return {n, true};
}

}  // namespace locrom
