#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilinear.hpp"

namespace rnsm {

// Full identity of a model in the family du/dt + Au + B(u,u) = f.
struct ModelParams {
  double theta = 1;
  double theta1 = 0;
  double theta2 = 0;
  double alpha = 0;
  double nu = 0;
  double eta = 0;  // magnetic diffusivity, coupled models only
  BilinearSelector selector;
  MultiplierSpec a_spec;  // coefficient carries nu
  int n_dim = 2;
  std::string label = "custom";
  bool nonlinear = true;

  bool coupled() const { return selector.coupled(); }
  // 0 for the advective (B1-type) forms, 1 for the rotational (B2-type) ones.
  int chi() const {
    const auto s = selector.coupled() ? selector.normalized() : selector;
    if (s.form == Form::B2) return 1;
    if (s.form == Form::B5) return s.ijk[0] == 2 ? 1 : 0;
    return 0;
  }
  // The form family used by the boundedness conditions.
  Form family() const {
    if (selector.form == Form::B1 || selector.form == Form::B2) return selector.form;
    const auto s = selector.normalized();
    if (s.ijk == std::array<int, 3>{1, 1, 1}) return Form::B3;
    return Form::B5;
  }
};

inline std::string canonical_model_name(std::string s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 2, "\xce\xb1") == 0) {  // UTF-8 alpha
      out += "alpha";
      ++i;
      continue;
    }
    const char c = s[i];
    out += (c == '_' || c == ' ') ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

struct PresetOptions {
  double alpha = 0.1;
  double nu = 0.01;
  double eta = 0.01;
  int n_dim = 2;
  // Only read by the NS-alpha-like family.
  double theta = 1;
  double theta2 = 1;
};

// Table of the named special cases. Smoothing filters use (I - alpha^2 Delta).
inline ModelParams preset(const std::string& name, const PresetOptions& o = {}) {
  const std::string key = canonical_model_name(name);
  ModelParams p;
  p.alpha = o.alpha;
  p.nu = o.nu;
  p.eta = o.eta;
  p.n_dim = o.n_dim;
  p.a_spec = MultiplierSpec::laplacian_power(1, o.nu);
  const auto S = MultiplierSpec::helmholtz(-1, o.alpha);
  const auto I = MultiplierSpec::identity();
  auto set = [&](const char* label, double th, double th1, double th2, Form f,
                 MultiplierSpec m, MultiplierSpec n) {
    p.label = label;
    p.theta = th;
    p.theta1 = th1;
    p.theta2 = th2;
    p.selector.form = f;
    p.selector.m_spec = m;
    p.selector.n_spec = n;
  };
  if (key == "nse") {
    set("NSE", 1, 0, 0, Form::B1, I, I);
  } else if (key == "leray-alpha") {
    set("Leray-alpha", 1, 1, 0, Form::B1, S, I);
  } else if (key == "ml-alpha") {
    set("ML-alpha", 1, 0, 1, Form::B1, I, S);
  } else if (key == "sbm") {
    set("SBM", 1, 1, 1, Form::B1, S, S);
  } else if (key == "nsv") {
    set("NSV", 0, 1, 1, Form::B1, S, S);
    p.a_spec = MultiplierSpec::voigt(o.alpha, o.nu);
  } else if (key == "ns-alpha") {
    set("NS-alpha", 1, 0, 1, Form::B2, I, S);
  } else if (key == "ns-alpha-like") {
    set("NS-alpha-like", o.theta, 0, o.theta2, Form::B2, I,
        MultiplierSpec::fractional_helmholtz(o.theta2, o.alpha));
    p.a_spec = MultiplierSpec::laplacian_power(o.theta, o.nu);
  } else if (key == "leray-alpha-mhd") {
    set("Leray-alpha-MHD", 1, 1, 0, Form::B3, S, I);
    p.selector = p.selector.normalized();
  } else if (key == "mhd-alpha") {
    set("MHD-alpha", 1, 1, 0, Form::B4, S, I);
    p.selector = p.selector.normalized();
  } else {
    throw std::invalid_argument("unknown model '" + name + "'");
  }
  return p;
}

inline const std::vector<std::string>& table_presets() {
  static const std::vector<std::string> names{"NSE", "Leray-alpha", "ML-alpha", "SBM",
                                              "NSV", "NS-alpha",    "NS-alpha-like"};
  return names;
}

// A model assembled from raw exponents: A = nu(-Delta)^theta,
// M = (I - alpha^2 Delta)^{-theta1}, N = (I - alpha^2 Delta)^{-theta2}.
inline ModelParams custom_model(double theta, double theta1, double theta2, Form form,
                                double alpha, double nu, int n_dim, double eta = 0) {
  ModelParams p;
  p.theta = theta;
  p.theta1 = theta1;
  p.theta2 = theta2;
  p.alpha = alpha;
  p.nu = nu;
  p.eta = eta;
  p.n_dim = n_dim;
  p.a_spec = MultiplierSpec::laplacian_power(theta, nu);
  p.selector.form = form;
  p.selector.m_spec = MultiplierSpec::helmholtz(-theta1, alpha);
  p.selector.n_spec = MultiplierSpec::helmholtz(-theta2, alpha);
  if (p.selector.coupled()) p.selector = p.selector.normalized();
  return p;
}

enum class ForcingMode { zero, steady_band, time_decaying_pair };

inline std::string to_string(ForcingMode m) {
  switch (m) {
    case ForcingMode::zero: return "zero";
    case ForcingMode::steady_band: return "steady-band";
    case ForcingMode::time_decaying_pair: return "time-decaying-pair";
  }
  return "?";
}

inline ForcingMode forcing_mode_from(const std::string& s) {
  for (auto m : {ForcingMode::zero, ForcingMode::steady_band, ForcingMode::time_decaying_pair})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown forcing mode '" + s + "'");
}

// f(t) = f0 + secondary_amplitude * exp(-decay_rate t) * f1, both drawn in
// the shell band; f0 has L2 norm `amplitude`, f1 has unit norm.
struct ForcingSpec {
  ForcingMode mode = ForcingMode::zero;
  double k_lo = 1;
  double k_hi = 2;
  double amplitude = 0;
  std::uint64_t seed = 1;
  double secondary_amplitude = 0;
  double decay_rate = 1;

  // Forcing length scale L / k_center (with k measured in lattice units).
  double length_scale(double L) const {
    const double kc = 0.5 * (k_lo + k_hi) / (2 * M_PI / L);
    return L / kc;
  }
};

class Forcing {
 public:
  Forcing() = default;
  Forcing(const ForcingSpec& spec, const GridPtr& g, bool coupled) : spec_(spec) {
    if (spec.k_lo > spec.k_hi) throw std::invalid_argument("forcing band is empty");
    Field f0(g), f1(g);
    if (spec.mode != ForcingMode::zero) {
      f0 = random_divfree_field(g, spec.seed, 0, spec.amplitude, Band{spec.k_lo, spec.k_hi});
      if (spec.mode == ForcingMode::time_decaying_pair)
        f1 = random_divfree_field(g, spec.seed + 0x9e3779b97f4a7c15ull, 0, 1,
                                  Band{spec.k_lo, spec.k_hi});
    }
    base_.push_back(f0);
    extra_.push_back(f1);
    if (coupled) {
      base_.emplace_back(g, FieldKind::magnetic);
      extra_.emplace_back(g, FieldKind::magnetic);
    }
  }

  const ForcingSpec& spec() const { return spec_; }
  bool active() const { return spec_.mode != ForcingMode::zero && !base_.empty(); }

  const State& base() const { return base_; }
  const State& extra() const { return extra_; }
  double secondary_factor(double t) const {
    return spec_.secondary_amplitude * std::exp(-spec_.decay_rate * t);
  }

  State at(double t) const {
    State f = base_;
    if (spec_.mode == ForcingMode::time_decaying_pair)
      axpy(f, spec_.secondary_amplitude * std::exp(-spec_.decay_rate * t), extra_);
    return f;
  }
  void add_to(State& rhs, double t) const {
    if (!active()) return;
    axpy(rhs, 1.0, base_);
    if (spec_.mode == ForcingMode::time_decaying_pair)
      axpy(rhs, spec_.secondary_amplitude * std::exp(-spec_.decay_rate * t), extra_);
  }

 private:
  ForcingSpec spec_;
  State base_, extra_;
};

}  // namespace rnsm
