#include "armada/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "armada/dual.hpp"
#include "armada/euler.hpp"
#include "armada/hermite.hpp"

namespace armada {

namespace {

constexpr int kChunk = 16;

struct CountEmit {
  std::vector<SliceInfo> slices;
  int count[3] = {0, 0, 0};

  void slice(const char* name, SliceKind kind) {
    finish();
    slices.push_back({name, kind, count[static_cast<int>(kind)], 0});
  }
  template <class T>
  void row(const T&) {
    ++count[static_cast<int>(slices.back().kind)];
  }
  void note(std::int32_t) {}
  void finish() {
    if (!slices.empty()) slices.back().end = count[static_cast<int>(slices.back().kind)];
  }
};

struct ValueEmit {
  double* out[3] = {nullptr, nullptr, nullptr};
  int at[3] = {0, 0, 0};
  int kind = 0;

  void slice(const char*, SliceKind k) { kind = static_cast<int>(k); }
  void row(double v) { out[kind][at[kind]++] = v; }
  void note(std::int32_t) {}
  void finish() {}
};

struct PatternEmit {
  std::vector<std::vector<int>>* rows = nullptr;
  std::vector<std::int32_t> sig;
  int base[3] = {0, 0, 0};  // global row offset per kind
  int at[3] = {0, 0, 0};
  int kind = 0;

  void slice(const char*, SliceKind k) { kind = static_cast<int>(k); }
  void row(const Track& v) {
    auto& r = (*rows)[base[kind] + at[kind]++];
    r.assign(v.deps.begin(), v.deps.end());
  }
  void note(std::int32_t s) { sig.push_back(s); }
  void finish() {}
};

struct DualEmit {
  const JacobianPattern* pat = nullptr;
  SparseRows* jac = nullptr;
  double* val[3] = {nullptr, nullptr, nullptr};
  int base[3] = {0, 0, 0};
  int at[3] = {0, 0, 0};
  int kind = 0;
  int color0 = 0;
  bool first_chunk = false;
  std::vector<std::int32_t> sig;

  void slice(const char*, SliceKind k) { kind = static_cast<int>(k); }
  void row(const Dual<kChunk>& v) {
    const int r = base[kind] + at[kind]++;
    if (first_chunk) val[kind][r - base[kind]] = v.v;
    auto& entries = jac->rows[r];
    for (auto& e : entries) {
      const int c = pat->color[e.first];
      if (c >= color0 && c < color0 + kChunk) e.second = v.d[c - color0];
    }
  }
  void note(std::int32_t s) {
    if (first_chunk) sig.push_back(s);
  }
  void finish() {}
};

void greedy_coloring(JacobianPattern& pat, int nvars) {
  std::vector<std::vector<int>> col_rows(nvars);
  for (int r = 0; r < static_cast<int>(pat.rows.size()); ++r)
    for (int c : pat.rows[r]) col_rows[c].push_back(r);

  std::vector<int> order;
  order.reserve(nvars);
  for (int c = 0; c < nvars; ++c)
    if (!col_rows[c].empty()) order.push_back(c);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return col_rows[a].size() > col_rows[b].size(); });

  pat.color.assign(nvars, -1);
  std::vector<int> forbidden;  // color -> last column that forbade it
  int ncol = 0;
  for (size_t oi = 0; oi < order.size(); ++oi) {
    const int c = order[oi];
    const int stamp = static_cast<int>(oi);
    for (int r : col_rows[c])
      for (int c2 : pat.rows[r]) {
        const int k = pat.color[c2];
        if (k >= 0) {
          if (k >= static_cast<int>(forbidden.size())) forbidden.resize(k + 1, -1);
          forbidden[k] = stamp;
        }
      }
    int pick = 0;
    while (pick < static_cast<int>(forbidden.size()) && forbidden[pick] == stamp) ++pick;
    pat.color[c] = pick;
    ncol = std::max(ncol, pick + 1);
  }
  pat.num_colors = ncol;
}

}  // namespace

template <class T, class Emit>
void Transcription::walk(const T* x, Emit& em) const {
  using std::exp;  // unqualified so AD scalars resolve by ADL
  using std::sqrt;
  using std::tanh;
  const OcpProblem& p = p_;
  const OcpConfig& c = p.config;
  const int zeta = p.arm_count();
  const double* scale = p.x_scale.data();

  auto rv = [&](const Ref& r) -> T {
    return r.free() ? x[r.idx] * T(scale[r.idx]) : T(r.fixed);
  };

  // Segment durations and phase starts per grid, durations = total *
  // softmax(squashed theta). The tanh squash bounds the logits (see
  // kLogitBound), shifting by the constant running max is exact (softmax
  // shift invariance) and keeps exp() in range.
  const int ngrid = static_cast<int>(p.grids.size());
  std::vector<std::vector<T>> dur(ngrid), start(ngrid);
  for (int g = 0; g < ngrid; ++g) {
    const GridDef& gd = p.grids[g];
    std::vector<T> b(gd.count);
    double m = -kLogitBound;
    for (int j = 0; j < gd.count; ++j) {
      b[j] = T(kLogitBound) * tanh(x[gd.theta0 + j] * T(1.0 / kLogitBound));
      m = std::max(m, value_of(b[j]));
    }
    T sum(0.0);
    std::vector<T> e(gd.count);
    for (int j = 0; j < gd.count; ++j) {
      e[j] = exp(b[j] - T(m));
      sum += e[j];
    }
    const T f = T(gd.total) / sum;
    dur[g].resize(gd.count);
    start[g].resize(gd.count + 1);
    start[g][0] = T(0.0);
    for (int j = 0; j < gd.count; ++j) {
      dur[g][j] = f * e[j];
      start[g][j + 1] = start[g][j] + dur[g][j];
    }
  }

  struct CV {
    T v, r, a;
  };
  auto eval_piece = [&](const Channel& ch, int phase, int sub, const T& local) -> CV {
    const Piece& pc = ch.piece(phase, sub);
    const T h = dur[ch.grid][phase] * T(1.0 / pc.nsub);
    const auto co = hermite_coefficients(rv(pc.u0), rv(pc.du0), rv(pc.u1), rv(pc.du1), h);
    return {hermite_value(co, local), hermite_rate(co, local), hermite_accel(co, local)};
  };
  auto eval_node = [&](const Channel& ch, const GridNode& nd) -> CV {
    const T h = dur[ch.grid][nd.phase] * T(1.0 / ch.phase_nsub[nd.phase]);
    return eval_piece(ch, nd.phase, nd.sub, T(nd.frac) * h);
  };
  auto node_time = [&](const Channel& ch, const GridNode& nd) -> T {
    const T h = dur[ch.grid][nd.phase] * T(1.0 / ch.phase_nsub[nd.phase]);
    return start[ch.grid][nd.phase] + T(static_cast<double>(nd.sub) + nd.frac) * h;
  };

  // Phase lookup by value (half-open pieces, t == T falls in the last phase).
  // The emitter records every selection; the Jacobian pass compares them
  // against the pattern's signature.
  auto locate = [&](int g, const T& t) -> std::pair<int, T> {
    const double tv = value_of(t);
    int ph = 0;
    const int n = static_cast<int>(dur[g].size());
    while (ph + 1 < n && tv >= value_of(start[g][ph + 1])) ++ph;
    em.note(ph);
    return {ph, t - start[g][ph]};
  };
  auto eval_at = [&](const Channel& ch, int phase, const T& local) -> CV {
    const int nsub = ch.phase_nsub[phase];
    int sub = 0;
    T off(0.0);
    if (nsub > 1) {
      const T h = dur[ch.grid][phase] * T(1.0 / nsub);
      sub = std::clamp(static_cast<int>(std::floor(value_of(local) / value_of(h))), 0, nsub - 1);
      off = T(static_cast<double>(sub)) * h;
    }
    em.note(sub);
    return eval_piece(ch, phase, sub, local - off);
  };

  auto dmat = [](const Eigen::Matrix3d& M, const Vec3T<T>& v) -> Vec3T<T> {
    return {T(M(0, 0)) * v[0] + T(M(0, 1)) * v[1] + T(M(0, 2)) * v[2],
            T(M(1, 0)) * v[0] + T(M(1, 1)) * v[1] + T(M(1, 2)) * v[2],
            T(M(2, 0)) * v[0] + T(M(2, 1)) * v[1] + T(M(2, 2)) * v[2]};
  };

  const GridNode first_node{0, 0, 0.0};
  const GridNode last_node{c.thruster_segments - 1, c.polys - 1, 1.0};

  // (a) boundary pose (and optionally rest) conditions
  em.slice("boundary_pose", SliceKind::Equality);
  for (int k = 0; k < 3; ++k)
    em.row(eval_node(p.base_pos[k], first_node).v - T(c.start.position[k]));
  for (int k = 0; k < 3; ++k)
    em.row(eval_node(p.base_euler[k], first_node).v - T(c.start.rpy[k]));
  for (int k = 0; k < 3; ++k)
    em.row(eval_node(p.base_pos[k], last_node).v - T(c.goal.position[k]));
  for (int k = 0; k < 3; ++k)
    em.row(eval_node(p.base_euler[k], last_node).v - T(c.goal.rpy[k]));
  if (c.pin_boundary_velocity) {
    em.slice("boundary_velocity", SliceKind::Equality);
    for (const GridNode& nd : {first_node, last_node}) {
      for (int k = 0; k < 3; ++k) em.row(eval_node(p.base_pos[k], nd).r);
      for (int k = 0; k < 3; ++k) em.row(eval_node(p.base_euler[k], nd).r);
    }
  }

  // (b) dynamics defects at the base collocation nodes, in acceleration
  // units: translation in the inertial frame, rotation in the body frame.
  em.slice("dynamics", SliceKind::Equality);
  const double inv_mass = 1.0 / p.model.total_mass;
  for (const GridNode& nd : p.defect_nodes) {
    const T t = node_time(p.base_pos[0], nd);
    const CV bx = eval_node(p.base_pos[0], nd);
    const CV by = eval_node(p.base_pos[1], nd);
    const CV bz = eval_node(p.base_pos[2], nd);
    const CV e0 = eval_node(p.base_euler[0], nd);
    const CV e1 = eval_node(p.base_euler[1], nd);
    const CV e2 = eval_node(p.base_euler[2], nd);
    const Vec3T<T> d{bx.v, by.v, bz.v};
    const Vec3T<T> rpy{e0.v, e1.v, e2.v};
    const Vec3T<T> rpyd{e0.r, e1.r, e2.r};
    const Vec3T<T> rpydd{e0.a, e1.a, e2.a};
    const Mat3T<T> R = rotation_zyx(rpy[0], rpy[1], rpy[2]);

    Vec3T<T> fsum{T(0.0), T(0.0), T(0.0)};
    Vec3T<T> tau{T(0.0), T(0.0), T(0.0)};
    for (int a = 0; a < zeta; ++a) {
      const auto [ph, local] = locate(1 + a, t);
      if (p.seed_schedule.timeline(a).kind(ph) == PhaseKind::Swing) continue;  // zero force
      const Vec3T<T> f{eval_at(p.force[a][0], ph, local).v, eval_at(p.force[a][1], ph, local).v,
                       eval_at(p.force[a][2], ph, local).v};
      const Vec3T<T> pe{eval_at(p.ee[a][0], ph, local).v, eval_at(p.ee[a][1], ph, local).v,
                        eval_at(p.ee[a][2], ph, local).v};
      fsum = fsum + f;
      tau = tau + cross(pe - d, f);
    }
    if (c.thrusters) {
      const Vec3T<T> u{eval_node(p.thruster_ch[0], nd).v, eval_node(p.thruster_ch[1], nd).v,
                       eval_node(p.thruster_ch[2], nd).v};
      fsum = fsum + mat_vec(R, u);
    }
    em.row(bx.a - T(inv_mass) * fsum[0]);
    em.row(by.a - T(inv_mass) * fsum[1]);
    em.row(bz.a - T(inv_mass) * fsum[2]);

    const Vec3T<T> w = body_rates_zyx(rpy, rpyd);
    const Vec3T<T> wd = body_accel_zyx(rpy, rpyd, rpydd);
    const Vec3T<T> rhs = dmat(inertia_inv_, mat_tvec(R, tau) - cross(w, dmat(p.model.inertia, w)));
    em.row(wd[0] - rhs[0]);
    em.row(wd[1] - rhs[1]);
    em.row(wd[2] - rhs[2]);
  }

  // (c) footholds on the surface
  em.slice("contact_height", SliceKind::Equality);
  for (int a = 0; a < zeta; ++a) {
    const ArmTimeline& tl = p.seed_schedule.timeline(a);
    for (int ph = 0; ph < static_cast<int>(tl.durations.size()); ++ph) {
      if (tl.kind(ph) != PhaseKind::Contact) continue;
      const T cx = rv(p.ee[a][0].piece(ph, 0).u0);
      const T cy = rv(p.ee[a][1].piece(ph, 0).u0);
      const T cz = rv(p.ee[a][2].piece(ph, 0).u0);
      em.row(cz - p.map.height(cx, cy));
    }
  }

  // (d) duration floors
  em.slice("duration_floor", SliceKind::Inequality);
  for (int g = 0; g < ngrid; ++g)
    for (int j = 0; j < static_cast<int>(dur[g].size()); ++j)
      em.row(dur[g][j] - T(c.duration_floor));

  // (e) kinematic reach boxes |R^T (p_i - d_b) - p_n| <= xi, componentwise
  em.slice("kinematic_box", SliceKind::Inequality);
  for (int a = 0; a < zeta; ++a) {
    const Eigen::Vector3d& pn = p.model.nominal_tool[a];
    const Eigen::Vector3d& xi = p.model.box_half_extents;
    for (const GridNode& nd : p.path_nodes[a]) {
      const T t = node_time(p.ee[a][0], nd);
      const Vec3T<T> pe{eval_node(p.ee[a][0], nd).v, eval_node(p.ee[a][1], nd).v,
                        eval_node(p.ee[a][2], nd).v};
      const auto [bph, blocal] = locate(0, t);
      const Vec3T<T> d{eval_at(p.base_pos[0], bph, blocal).v, eval_at(p.base_pos[1], bph, blocal).v,
                       eval_at(p.base_pos[2], bph, blocal).v};
      const Vec3T<T> rpy{eval_at(p.base_euler[0], bph, blocal).v,
                         eval_at(p.base_euler[1], bph, blocal).v,
                         eval_at(p.base_euler[2], bph, blocal).v};
      const Mat3T<T> R = rotation_zyx(rpy[0], rpy[1], rpy[2]);
      const Vec3T<T> rel = mat_tvec(R, pe - d);
      for (int k = 0; k < 3; ++k) {
        const T err = rel[k] - T(pn[k]);
        em.row(T(xi[k]) - err);
        em.row(T(xi[k]) + err);
      }
    }
  }

  // (f) swing clearance above the surface, mid-swing nodes only
  em.slice("swing_clearance", SliceKind::Inequality);
  for (int a = 0; a < zeta; ++a) {
    for (size_t i = 0; i < p.path_nodes[a].size(); ++i) {
      if (!p.clearance_node[a][i]) continue;
      const GridNode& nd = p.path_nodes[a][i];
      const T px = eval_node(p.ee[a][0], nd).v;
      const T py = eval_node(p.ee[a][1], nd).v;
      const T pz = eval_node(p.ee[a][2], nd).v;
      em.row(pz - p.map.height(px, py) - T(c.clearance));
    }
  }

  // (g) two-sided thruster bounds at the collocation nodes
  if (c.thrusters) {
    em.slice("thruster_limit", SliceKind::Inequality);
    const double lim = p.model.thruster_limit;
    for (const GridNode& nd : p.defect_nodes) {
      for (int k = 0; k < 3; ++k) {
        const T u = eval_node(p.thruster_ch[k], nd).v;
        em.row(T(lim) - u);
        em.row(T(lim) + u);
      }
    }
  }

  // (h) gait serialization: consecutive swing windows must not overlap
  if (!p.swing_order.empty()) {
    em.slice("gait_order", SliceKind::Inequality);
    for (const SwingOrderPair& pr : p.swing_order) {
      const T end_before =
          start[1 + pr.arm_before][pr.phase_before] + dur[1 + pr.arm_before][pr.phase_before];
      em.row(start[1 + pr.arm_after][pr.phase_after] - end_before);
    }
  }

  // Cost, composite Simpson per piece. Weights 1,4,2,...,4,1 over an odd
  // node count D integrate with step h/(D-1), total factor h/(3(D-1)).
  auto simpson_w = [](int j, int D) -> double {
    if (j == 0 || j == D - 1) return 1.0;
    return (j % 2 == 1) ? 4.0 : 2.0;
  };

  // Cost slices emit least-squares residual rows: the objective is the sum of
  // squared rows, so each quadrature node contributes sqrt(weight) * quantity.
  em.slice("cost_velocity", SliceKind::Cost);
  const int D = c.defect_nodes;
  for (int ph = 0; ph < c.thruster_segments; ++ph) {
    for (int sub = 0; sub < c.polys; ++sub) {
      const T h = dur[0][ph] * T(1.0 / c.polys);
      for (int k = 0; k < 3; ++k) {
        if (c.sigma_velocity[k] <= 0.0) continue;
        for (int j = 0; j < D; ++j) {
          const T l = T(static_cast<double>(j) / (D - 1)) * h;
          const T r = eval_piece(p.base_pos[k], ph, sub, l).r;
          em.row(sqrt(T(c.sigma_velocity[k] * simpson_w(j, D) / (3.0 * (D - 1))) * h) * r);
        }
      }
    }
  }

  if (c.sigma_angular > 0.0) {
    em.slice("cost_angular", SliceKind::Cost);
    for (int ph = 0; ph < c.thruster_segments; ++ph) {
      for (int sub = 0; sub < c.polys; ++sub) {
        const T h = dur[0][ph] * T(1.0 / c.polys);
        for (int j = 0; j < D; ++j) {
          const T l = T(static_cast<double>(j) / (D - 1)) * h;
          const CV e0 = eval_piece(p.base_euler[0], ph, sub, l);
          const CV e1 = eval_piece(p.base_euler[1], ph, sub, l);
          const CV e2 = eval_piece(p.base_euler[2], ph, sub, l);
          const Vec3T<T> w = body_rates_zyx<T>({e0.v, e1.v, e2.v}, {e0.r, e1.r, e2.r});
          const T cw = sqrt(T(c.sigma_angular * simpson_w(j, D) / (3.0 * (D - 1))) * h);
          em.row(cw * w[0]);
          em.row(cw * w[1]);
          em.row(cw * w[2]);
        }
      }
    }
  }

  em.slice("cost_force", SliceKind::Cost);
  const int Pn = c.path_nodes;
  for (int a = 0; a < zeta; ++a) {
    const ArmTimeline& tl = p.seed_schedule.timeline(a);
    for (int ph = 0; ph < static_cast<int>(tl.durations.size()); ++ph) {
      if (tl.kind(ph) != PhaseKind::Contact) continue;
      const int nsub = p.force[a][0].phase_nsub[ph];
      for (int sub = 0; sub < nsub; ++sub) {
        const T h = dur[1 + a][ph] * T(1.0 / nsub);
        for (int k = 0; k < 3; ++k) {
          if (c.sigma_force[k] <= 0.0) continue;
          for (int j = 0; j < Pn; ++j) {
            const T l = T(static_cast<double>(j) / (Pn - 1)) * h;
            const T f = eval_piece(p.force[a][k], ph, sub, l).v;
            em.row(sqrt(T(c.sigma_force[k] * simpson_w(j, Pn) / (3.0 * (Pn - 1))) * h) * f);
          }
        }
      }
    }
  }

  em.finish();
}

Transcription::Transcription(OcpProblem problem) : p_(std::move(problem)) {
  inertia_inv_ = p_.model.inertia_inverse();
  CountEmit ce;
  walk(p_.x_seed.data(), ce);
  ce.finish();
  slices_ = std::move(ce.slices);
  n_eq_ = ce.count[0];
  n_ineq_ = ce.count[1];
  n_cost_ = ce.count[2];
}

const SliceInfo* Transcription::find_slice(const std::string& name) const {
  for (const SliceInfo& s : slices_)
    if (s.name == name) return &s;
  return nullptr;
}

void Transcription::eval(const Eigen::VectorXd& x, Eigen::VectorXd& eq, Eigen::VectorXd& ineq,
                         double& cost) const {
  eq.resize(n_eq_);
  ineq.resize(n_ineq_);
  Eigen::VectorXd terms(n_cost_);
  ValueEmit ve;
  ve.out[0] = eq.data();
  ve.out[1] = ineq.data();
  ve.out[2] = terms.data();
  walk(x.data(), ve);
  cost = terms.squaredNorm();
}

JacobianPattern Transcription::pattern(const Eigen::VectorXd& x) const {
  std::vector<Track> xt(p_.nx);
  for (int i = 0; i < p_.nx; ++i) {
    xt[i] = Track(x[i]);
    xt[i].deps = {i};
  }
  JacobianPattern pat;
  pat.rows.assign(num_rows(), {});
  PatternEmit pe;
  pe.rows = &pat.rows;
  pe.base[0] = 0;
  pe.base[1] = n_eq_;
  pe.base[2] = n_eq_ + n_ineq_;
  walk(xt.data(), pe);
  pat.signature = std::move(pe.sig);
  greedy_coloring(pat, p_.nx);
  return pat;
}

bool Transcription::jacobian(const Eigen::VectorXd& x, const JacobianPattern& pat, SparseRows& jac,
                             Eigen::VectorXd& eq, Eigen::VectorXd& ineq,
                             Eigen::VectorXd& cost_terms) const {
  eq.resize(n_eq_);
  ineq.resize(n_ineq_);
  cost_terms.resize(n_cost_);
  jac.rows.resize(num_rows());
  for (int r = 0; r < num_rows(); ++r) {
    jac.rows[r].resize(pat.rows[r].size());
    for (size_t k = 0; k < pat.rows[r].size(); ++k) jac.rows[r][k] = {pat.rows[r][k], 0.0};
  }

  const int chunks = std::max(1, (pat.num_colors + kChunk - 1) / kChunk);
  std::vector<Dual<kChunk>> xd(p_.nx);
  for (int ch = 0; ch < chunks; ++ch) {
    const int color0 = ch * kChunk;
    for (int i = 0; i < p_.nx; ++i) {
      xd[i] = Dual<kChunk>(x[i]);
      const int col = pat.color[i];
      if (col >= color0 && col < color0 + kChunk) xd[i].d[col - color0] = 1.0;
    }
    DualEmit de;
    de.pat = &pat;
    de.jac = &jac;
    de.val[0] = eq.data();
    de.val[1] = ineq.data();
    de.val[2] = cost_terms.data();
    de.base[0] = 0;
    de.base[1] = n_eq_;
    de.base[2] = n_eq_ + n_ineq_;
    de.color0 = color0;
    de.first_chunk = (ch == 0);
    walk(xd.data(), de);
    if (ch == 0 && de.sig != pat.signature) return false;
  }
  return true;
}

}  // namespace armada
