#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"
#include "trajectory.hpp"

namespace rnsm {

class BlowUp : public std::runtime_error {
 public:
  explicit BlowUp(double t)
      : std::runtime_error("solution blew up at t = " + std::to_string(t)), time(t) {}
  double time;
};

// Running integrals of 2<Au,Nu> and 2<f,Nu>, accumulated with the RK4 stage
// weights so they carry the integrator's order.
struct BudgetIntegrals {
  double dissipation = 0;
  double forcing = 0;
};

using Observer = std::function<void(double t, const State& u)>;

struct IntegrateOptions {
  int sample_every = 1;
  std::vector<double> sobolev_orders;
  std::vector<Observer> observers;
  // Low-mode replacement used by the synchronization experiments: called
  // after every step with the new time and state.
  std::function<void(double t, State& u)> after_step;
};

struct Trajectory {
  TrajectoryRecord record;
  State final_state;
  double final_time = 0;
};

// Integrating-factor RK4 for du/dt + Au + B(u,u) = f on the dealiased
// Fourier truncation. The linear part is integrated exactly through
// exp(-a(k) dt); for coupled models it is diag(nu a, eta a).
class Solver {
 public:
  Solver(ModelParams p, GridPtr g, ForcingSpec f = {})
      : p_(std::move(p)), g_(std::move(g)), forcing_(f, g_, p_.coupled()) {
    if (g_->dims() != p_.n_dim) p_.n_dim = g_->dims();
    validate(p_.a_spec, *g_, OperatorRole::dissipation);
    validate(p_.selector.m_spec, *g_, OperatorRole::any);
    validate(p_.selector.n_spec, *g_, OperatorRole::smoothing);
    rates_.push_back(p_.a_spec.table(*g_));
    if (p_.coupled()) {
      MultiplierSpec h = p_.a_spec;
      h.coefficient = p_.eta;
      rates_.push_back(h.table(*g_));
    }
    nsym_ = p_.selector.n_spec.table(*g_);
    msym_ = p_.selector.m_spec.table(*g_);
    if (p_.selector.coupled()) sel_ = p_.selector.normalized();
  }

  const ModelParams& params() const { return p_; }
  const Grid& grid() const { return *g_; }
  const GridPtr& grid_ptr() const { return g_; }
  const Forcing& forcing() const { return forcing_; }
  std::size_t blocks() const { return rates_.size(); }

  State zero_state() const {
    State s{Field(g_)};
    if (p_.coupled()) s.emplace_back(g_, FieldKind::magnetic);
    return s;
  }

  // Projects, truncates and checks block count.
  State admit(State u) const {
    if (u.size() != blocks()) throw std::invalid_argument("state has the wrong number of blocks");
    for (auto& f : u) {
      f.check_same(Field(g_));
      truncate_inplace(f);
      leray_project_inplace(f);
    }
    return u;
  }

  // -B(u,u) + f(t)
  State rhs(const State& u, double t) const {
    State r = p_.nonlinear ? nonlinear(u) : zeros_like(u);
    if (p_.nonlinear) for (auto& f : r) f *= -1.0;
    forcing_.add_to(r, t);
    return r;
  }

  State apply_A(const State& u) const { return scale_by(u, rates_); }
  State apply_N(const State& u) const {
    State out = u;
    for (auto& f : out) scale_field(f, nsym_);
    return out;
  }

  double energy_N(const State& u) const { return weighted(u, u, nullptr); }
  double dissipation_AN(const State& u) const { return weighted(u, u, &rates_); }
  double forcing_N(const State& u, double t) const {
    if (!forcing_.active()) return 0.0;
    double s = weighted(forcing_.base(), u, nullptr);
    if (forcing_.spec().mode == ForcingMode::time_decaying_pair)
      s += forcing_.secondary_factor(t) * weighted(forcing_.extra(), u, nullptr);
    return s;
  }

  void step(double& t, State& u, double dt, BudgetIntegrals* budget = nullptr) const {
    if (!(dt != 0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be nonzero");
    prepare(dt);
    const State k1 = rhs(u, t);

    State u2 = u;
    axpy(u2, dt / 2, k1);
    decay(u2, half_);
    const State k2 = rhs(u2, t + dt / 2);

    State eu = u;
    decay(eu, half_);
    State u3 = eu;
    axpy(u3, dt / 2, k2);
    const State k3 = rhs(u3, t + dt / 2);

    State u4 = eu;
    decay(u4, half_);
    State ek3 = k3;
    decay(ek3, half_);
    axpy(u4, dt, ek3);
    const State k4 = rhs(u4, t + dt);

    if (budget) {
      auto g = [&](const State& s, double ts, double w) {
        budget->dissipation += w * 2 * dissipation_AN(s);
        budget->forcing += w * 2 * forcing_N(s, ts);
      };
      g(u, t, dt / 6);
      g(u2, t + dt / 2, dt / 3);
      g(u3, t + dt / 2, dt / 3);
      g(u4, t + dt, dt / 6);
    }

    State acc = k2;
    axpy(acc, 1.0, k3);
    decay(acc, half_);
    axpy(acc, 0.5, k4);
    State ek1 = k1;
    decay(ek1, full_);
    axpy(acc, 0.5, ek1);
    decay(u, full_);
    axpy(u, dt / 3, acc);
    t += dt;

    const double m = max_abs(u);
    if (std::isnan(m) || m > 1e15) throw BlowUp(t);
  }

  Trajectory integrate(State u0, double t0, double t_end, double dt,
                       const IntegrateOptions& opt = {}) const {
    if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
    if (!(t_end > t0)) throw std::invalid_argument("t_end must exceed the start time");
    const double ratio = (t_end - t0) / dt;
    const long nsteps = std::lround(ratio);
    if (std::abs(ratio - nsteps) > 1e-6 * std::max(1.0, ratio))
      throw std::invalid_argument("dt does not divide the integration interval");
    if (opt.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");

    Trajectory tr;
    auto& rec = tr.record;
    rec.dt = dt;
    rec.steps_per_sample = opt.sample_every;
    rec.columns = {"energy_N", "dissipation_AN", "forcing_N", "int_dissipation_AN",
                   "int_forcing_N", "energy", "forcing_norm"};
    if (p_.coupled()) rec.columns.push_back("cross_helicity");
    for (double s : opt.sobolev_orders) rec.columns.push_back(norm_column(s));
    rec.header_notes.push_back("model=" + p_.label + " theta=" + format_order(p_.theta) +
                               " theta1=" + format_order(p_.theta1) +
                               " theta2=" + format_order(p_.theta2) +
                               " alpha=" + format_order(p_.alpha) + " nu=" + format_order(p_.nu) +
                               " form=" + to_string(p_.selector.form));

    State u = admit(std::move(u0));
    double t = t0;
    BudgetIntegrals budget;
    rec.cfl_dt = cfl_advisory(u);
    sample(rec, t, u, budget, opt);
    try {
      for (long n = 1; n <= nsteps; ++n) {
        step(t, u, dt, &budget);
        t = t0 + n * dt;  // avoid drift from repeated addition
        if (opt.after_step) opt.after_step(t, u);
        if (n % opt.sample_every == 0 || n == nsteps) sample(rec, t, u, budget, opt);
      }
    } catch (const BlowUp& b) {
      rec.blew_up = true;
      rec.blowup_time = b.time;
    }
    tr.final_state = std::move(u);
    tr.final_time = t;
    return tr;
  }

  // dt <= dx / max|Mu| (reported only).
  double cfl_advisory(const State& u) const {
    double vmax = 0;
    for (const auto& f : u) {
      const auto phys = physical_values(apply_multiplier(p_.selector.m_spec, f));
      for (std::size_t x = 0; x < g_->physical_size(); ++x) {
        double s = 0;
        for (const auto& c : phys) s += c[x] * c[x];
        vmax = std::max(vmax, std::sqrt(s));
      }
    }
    const double dx = g_->length() / g_->resolution();
    return vmax > 0 ? dx / vmax : std::numeric_limits<double>::infinity();
  }

 private:
  void sample(TrajectoryRecord& rec, double t, const State& u, const BudgetIntegrals& b,
              const IntegrateOptions& opt) const {
    std::vector<double> row;
    row.push_back(energy_N(u));
    row.push_back(dissipation_AN(u));
    row.push_back(forcing_N(u, t));
    row.push_back(b.dissipation / 2);
    row.push_back(b.forcing / 2);
    row.push_back(0.5 * inner(u, u));
    row.push_back(forcing_.active() ? volume_averaged_norm(forcing_.at(t)[0], -p_.theta - p_.theta2) : 0.0);
    if (p_.coupled()) row.push_back(0.5 * inner(u[0], u[1]));
    for (double s : opt.sobolev_orders) row.push_back(sobolev_norm_sq(u[0], s));
    rec.times.push_back(t);
    rec.rows.push_back(std::move(row));
    for (const auto& ob : opt.observers) ob(t, u);
  }

  // B(u,u) with the cached M and N tables.
  State nonlinear(const State& u) const {
    auto scaled = [&](const std::vector<double>& tab, bool identity) {
      State out = u;
      if (!identity)
        for (auto& f : out) scale_field(f, tab);
      return out;
    };
    const State mu = scaled(msym_, p_.selector.m_spec.is_identity());
    const State nv = scaled(nsym_, p_.selector.n_spec.is_identity());
    if (!p_.selector.coupled())
      return {p_.selector.form == Form::B1 ? bbar1(mu[0], nv[0]) : bbar2(mu[0], nv[0])};
    return bbar5(sel_.ijk, mu, nv);
  }

  // sum_b <x_b, diag(s_b) N y_b>, with s = 1 when rates is null.
  double weighted(const State& x, const State& y,
                  const std::vector<std::vector<double>>* rates) const {
    const Grid& g = *g_;
    double sum = 0;
    for (std::size_t b = 0; b < x.size(); ++b)
      for (std::size_t i = 0; i < g.spectral_size(); ++i) {
        double a = 0;
        for (int c = 0; c < x[b].dims(); ++c)
          a += x[b][c][i].real() * y[b][c][i].real() + x[b][c][i].imag() * y[b][c][i].imag();
        if (a == 0) continue;
        double w = g.weight(i) * nsym_[i];
        if (rates) w *= (*rates)[b][i];
        sum += w * a;
      }
    return sum;
  }

  static void scale_field(Field& f, const std::vector<double>& s) {
    for (int c = 0; c < f.dims(); ++c)
      for (std::size_t i = 0; i < s.size(); ++i) f[c][i] *= s[i];
  }
  static State scale_by(const State& u, const std::vector<std::vector<double>>& s) {
    State out = u;
    for (std::size_t b = 0; b < out.size(); ++b) scale_field(out[b], s[b]);
    return out;
  }
  void decay(State& u, const std::vector<std::vector<double>>& e) const {
    for (std::size_t b = 0; b < u.size(); ++b) scale_field(u[b], e[b]);
  }

  void prepare(double dt) const {
    if (dt == cached_dt_) return;
    half_.assign(rates_.size(), {});
    full_.assign(rates_.size(), {});
    for (std::size_t b = 0; b < rates_.size(); ++b) {
      half_[b].resize(rates_[b].size());
      full_[b].resize(rates_[b].size());
      for (std::size_t i = 0; i < rates_[b].size(); ++i) {
        half_[b][i] = g_->retained(i) ? std::exp(-rates_[b][i] * dt / 2) : 0.0;
        full_[b][i] = g_->retained(i) ? std::exp(-rates_[b][i] * dt) : 0.0;
      }
    }
    cached_dt_ = dt;
  }

  ModelParams p_;
  GridPtr g_;
  Forcing forcing_;
  std::vector<std::vector<double>> rates_;
  std::vector<double> nsym_, msym_;
  BilinearSelector sel_;
  mutable double cached_dt_ = 0;
  mutable std::vector<std::vector<double>> half_, full_;
};

}  // namespace rnsm
