#include "rte/hmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rte {

void HConfig::validate() const {
  if (!(eta_adm >= 0.0)) throw std::invalid_argument("eta_adm must be non-negative");
  if (p < 2) throw std::invalid_argument("p must be at least 2");
  if (n_min < 1) throw std::invalid_argument("n_min must be at least 1");
  if (!(recompress_tol >= 0.0)) throw std::invalid_argument("recompress_tol must be non-negative");
}

std::vector<int> ClusterTree::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (nodes[i].is_leaf()) out.push_back(i);
  return out;
}

int ClusterTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

namespace {

constexpr double kBoxInflation = 1e-6;

Box3 inflate(Box3 box) {
  box.min().array() -= kBoxInflation;
  box.max().array() += kBoxInflation;
  return box;
}

using Box2 = Eigen::AlignedBox2d;

}  // namespace

ClusterTree build_cluster_tree(const std::vector<Vec3>& points, const HConfig& cfg, const std::vector<Box3>* supports) {
  cfg.validate();
  if (points.empty()) throw std::invalid_argument("cannot build a cluster tree over an empty point set");
  if (supports && supports->size() != points.size())
    throw std::invalid_argument("support box count does not match point count");
  ClusterTree tree;
  tree.perm.resize(points.size());
  std::iota(tree.perm.begin(), tree.perm.end(), 0);

  std::function<int(Index, Index, int)> build = [&](Index begin, Index end, int depth) -> int {
    ClusterNode node;
    node.begin = begin;
    node.end = end;
    node.depth = depth;
    Box3 centers;
    for (Index i = begin; i < end; ++i) {
      const int idx = tree.perm[i];
      centers.extend(points[idx]);
      node.box.extend(supports ? (*supports)[idx] : Box3(points[idx], points[idx]));
    }
    node.box = inflate(node.box);
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);
    if (end - begin <= cfg.n_min) return id;
    int axis = 0;
    centers.diagonal().maxCoeff(&axis);
    if (centers.diagonal()[axis] <= 0.0) return id;  // coincident points
    const Index mid = begin + (end - begin) / 2;
    std::nth_element(tree.perm.begin() + begin, tree.perm.begin() + mid, tree.perm.begin() + end,
                     [&](int a, int b) { return points[a][axis] < points[b][axis]; });
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    tree.nodes[id].children[0] = left;
    tree.nodes[id].children[1] = right;
    return id;
  };
  build(0, static_cast<Index>(points.size()), 0);
  return tree;
}

namespace {

// Chebyshev tensor grid on a rectangle in the plane tangent to the unit
// sphere at `center`. The kernel is radially constant, so evaluating it on
// the tangent plane covers every direction of the cluster.
class TangentChebyshev {
 public:
  TangentChebyshev(const Vec3& center, const Vec3& e1, const Vec3& e2, const Eigen::Vector2d& lo,
                   const Eigen::Vector2d& hi, int p)
      : c_(center), e1_(e1), e2_(e2), p_(p) {
    for (int d = 0; d < 2; ++d) {
      const double mid = 0.5 * (lo[d] + hi[d]);
      const double half = 0.5 * (hi[d] - lo[d]);
      for (int i = 0; i < p; ++i) nodes_[d][i] = mid + half * std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * p));
    }
  }

  [[nodiscard]] int size() const { return p_ * p_; }

  [[nodiscard]] Vec3 node(int a) const { return c_ + nodes_[0][a % p_] * e1_ + nodes_[1][a / p_] * e2_; }

  [[nodiscard]] Eigen::Vector2d coords(const Vec3& x) const {
    const double r = x.dot(c_);
    return {x.dot(e1_) / r, x.dot(e2_) / r};
  }

  void lagrange(const Vec3& x, double* out) const {
    const Eigen::Vector2d u = coords(x);
    double l[2][16];
    for (int d = 0; d < 2; ++d) {
      for (int i = 0; i < p_; ++i) {
        double v = 1.0;
        for (int j = 0; j < p_; ++j)
          if (j != i) v *= (u[d] - nodes_[d][j]) / (nodes_[d][i] - nodes_[d][j]);
        l[d][i] = v;
      }
    }
    for (int b = 0; b < p_; ++b)
      for (int a = 0; a < p_; ++a) out[a + p_ * b] = l[0][a] * l[1][b];
  }

 private:
  Vec3 c_, e1_, e2_;
  int p_;
  double nodes_[2][16];
};

// Tangent-plane frame and gnomonic bounding rectangle of one cluster.
struct ClusterFrame {
  Vec3 center, e1, e2;
  Eigen::Vector2d lo, hi;
  double angle = 0.0;  // largest angle between center and a cluster point
  bool usable = false;

  [[nodiscard]] double diameter() const { return (hi - lo).norm(); }
};

constexpr double kMaxFrameAngle = 1.0;  // radians; gnomonic boxes blow up near pi/2

ClusterFrame make_frame(const ClusterTree& tree, const ClusterNode& node, const ScatteringIntegrator& integ) {
  ClusterFrame f;
  Vec3 sum = Vec3::Zero();
  for (Index t = node.begin; t < node.end; ++t) {
    const PanelRule& r = integ.far_rule(tree.perm[t]);
    sum += (r.weights.transpose() * r.points).transpose();
  }
  if (sum.norm() < 1e-12) return f;
  f.center = sum.normalized();
  const Vec3 helper = std::abs(f.center.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  f.e1 = f.center.cross(helper).normalized();
  f.e2 = f.center.cross(f.e1);
  double min_cos = 1.0;
  Box2 box;
  for (Index t = node.begin; t < node.end; ++t) {
    const PanelRule& r = integ.far_rule(tree.perm[t]);
    for (Index q = 0; q < r.points.rows(); ++q) {
      const Vec3 x = r.points.row(q).transpose();
      const double cs = x.dot(f.center);
      min_cos = std::min(min_cos, cs);
      if (cs > 0.0) box.extend(Eigen::Vector2d(x.dot(f.e1) / cs, x.dot(f.e2) / cs));
    }
  }
  f.angle = std::acos(std::clamp(min_cos, -1.0, 1.0));
  f.usable = f.angle < kMaxFrameAngle;
  f.lo = box.min().array() - kBoxInflation;
  f.hi = box.max().array() + kBoxInflation;
  return f;
}

// Chordal distance between two spherical caps.
double cap_distance(const ClusterFrame& a, const ClusterFrame& b, double sign) {
  const double between = std::acos(std::clamp(sign * a.center.dot(b.center), -1.0, 1.0));
  const double gap = std::max(0.0, between - a.angle - b.angle);
  return 2.0 * std::sin(0.5 * gap);
}

}  // namespace

HMatrixApprox compress_scattering(const SphereMesh& mesh, const PhaseFunction& phase, Parity parity,
                                  const HConfig& cfg, const AngularQuadrature& quad) {
  cfg.validate();
  if (cfg.p > 16) throw std::invalid_argument("p larger than 16 is not supported");
  const PhaseFunction checked(phase.g);
  const ScatteringIntegrator integ(mesh, checked, quad);
  const int n = integ.size();
  const int mult = parity == Parity::Even ? 1 : 3;

  std::vector<Vec3> centers(n);
  std::vector<Box3> supports(n);
  for (int k = 0; k < n; ++k) {
    const PanelRule& r = integ.far_rule(k);
    Box3 b;
    for (Index q = 0; q < r.points.rows(); ++q) b.extend(Vec3(r.points.row(q).transpose()));
    supports[k] = b;
    centers[k] = mesh.flat_centroid(mesh.representatives[k]);
  }

  HMatrixApprox H;
  H.n_ = static_cast<Index>(n) * mult;
  H.mult_ = mult;
  H.tree_ = build_cluster_tree(centers, cfg, &supports);
  const ClusterTree& tree = H.tree_;
  H.order_.resize(H.n_);
  for (Index t = 0; t < n; ++t)
    for (int j = 0; j < mult; ++j) H.order_[mult * t + j] = static_cast<Index>(mult) * tree.perm[t] + j;

  std::vector<Vec3> panel_center(n);
  std::vector<double> panel_radius(n);
  for (int k = 0; k < n; ++k) {
    const PanelRule& r = integ.far_rule(k);
    panel_center[k] = (r.weights.transpose() * r.points).transpose().normalized();
    double rad = 0.0;
    for (Index q = 0; q < r.points.rows(); ++q)
      rad = std::max(rad, (Vec3(r.points.row(q).transpose()) - panel_center[k]).norm());
    panel_radius[k] = rad;
  }
  std::vector<ClusterFrame> frames;
  frames.reserve(tree.nodes.size());
  for (const ClusterNode& node : tree.nodes) frames.push_back(make_frame(tree, node, integ));

  // The folded kernel is smooth only away from both s' = s and s' = -s.
  // Distances are taken between the panel supports; the cap bound is a cheap
  // lower bound that settles most pairs.
  auto support_distance = [&](int a, int b, double sign) {
    const ClusterNode& na = tree.nodes[a];
    const ClusterNode& nb = tree.nodes[b];
    double d = std::numeric_limits<double>::infinity();
    for (Index i = na.begin; i < na.end; ++i) {
      const int pi = tree.perm[i];
      for (Index j = nb.begin; j < nb.end; ++j) {
        const int pj = tree.perm[j];
        d = std::min(d, (panel_center[pi] - sign * panel_center[pj]).norm() - panel_radius[pi] - panel_radius[pj]);
      }
    }
    return std::max(d, 0.0);
  };
  auto admissible = [&](int a, int b) {
    if (cfg.eta_adm <= 0.0) return false;
    const ClusterFrame& fa = frames[a];
    const ClusterFrame& fb = frames[b];
    if (!fa.usable || !fb.usable) return false;
    const double reach = std::min(fa.diameter(), fb.diameter()) / cfg.eta_adm;
    for (const double sign : {1.0, -1.0}) {
      if (cap_distance(fa, fb, sign) >= reach) continue;
      if ((fa.center - sign * fb.center).norm() < reach) return false;
      if (support_distance(a, b, sign) < reach) return false;
    }
    return true;
  };

  // Per-cluster interpolation moments, computed on demand.
  std::vector<Matrix> moments(tree.nodes.size());
  auto cluster_moments = [&](int id) -> const Matrix& {
    Matrix& m = moments[id];
    if (m.size() > 0) return m;
    const ClusterNode& node = tree.nodes[id];
    const ClusterFrame& f = frames[id];
    const TangentChebyshev cheb(f.center, f.e1, f.e2, f.lo, f.hi, cfg.p);
    const int r = cheb.size();
    m = Matrix::Zero(node.size() * mult, r);
    std::vector<double> row(r);
    for (Index t = node.begin; t < node.end; ++t) {
      const PanelRule& rule = integ.far_rule(tree.perm[t]);
      for (Index q = 0; q < rule.points.rows(); ++q) {
        cheb.lagrange(rule.points.row(q).transpose(), row.data());
        const Eigen::Map<const Eigen::RowVectorXd> lr(row.data(), r);
        if (mult == 1) {
          m.row(t - node.begin) += rule.weights[q] * lr;
        } else {
          for (int j = 0; j < 3; ++j) m.row(3 * (t - node.begin) + j) += rule.lambda_w(q, j) * lr;
        }
      }
    }
    return m;
  };

  const double sign = parity == Parity::Even ? 1.0 : -1.0;
  auto make_low_rank = [&](int rid, int cid, HBlock& blk) {
    const ClusterFrame& fr = frames[rid];
    const ClusterFrame& fc = frames[cid];
    const TangentChebyshev cr(fr.center, fr.e1, fr.e2, fr.lo, fr.hi, cfg.p);
    const TangentChebyshev cc(fc.center, fc.e1, fc.e2, fc.lo, fc.hi, cfg.p);
    const int r = cr.size();
    Matrix C(r, r);
    for (int a = 0; a < r; ++a) {
      const Vec3 xa = cr.node(a);
      for (int b = 0; b < r; ++b) {
        const Vec3 yb = cc.node(b);
        C(a, b) = hg_extended(checked, xa, yb) + sign * hg_extended(checked, xa, -yb);
      }
    }
    blk.U = 2.0 * cluster_moments(rid) * C;
    blk.V = cluster_moments(cid);
    if (cfg.recompress_tol > 0.0) {
      Eigen::HouseholderQR<Matrix> qu(blk.U), qv(blk.V);
      const Index ku = std::min(blk.U.rows(), blk.U.cols()), kv = std::min(blk.V.rows(), blk.V.cols());
      const Matrix Qu = qu.householderQ() * Matrix::Identity(blk.U.rows(), ku);
      const Matrix Qv = qv.householderQ() * Matrix::Identity(blk.V.rows(), kv);
      const Matrix Ru = qu.matrixQR().topRows(ku).triangularView<Eigen::Upper>();
      const Matrix Rv = qv.matrixQR().topRows(kv).triangularView<Eigen::Upper>();
      Eigen::JacobiSVD<Matrix> svd(Ru * Rv.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector& s = svd.singularValues();
      Index k = 0;
      while (k < s.size() && s[k] > cfg.recompress_tol * s[0]) ++k;
      blk.U = Qu * svd.matrixU().leftCols(k) * s.head(k).asDiagonal();
      blk.V = Qv * svd.matrixV().leftCols(k);
    }
  };

  auto make_dense = [&](int rid, int cid, HBlock& blk) {
    const ClusterNode& rn = tree.nodes[rid];
    const ClusterNode& cn = tree.nodes[cid];
    blk.dense.resize(rn.size() * mult, cn.size() * mult);
    double e = 0.0;
    Eigen::Matrix3d o;
    for (Index i = rn.begin; i < rn.end; ++i) {
      for (Index j = cn.begin; j < cn.end; ++j) {
        if (mult == 1) {
          integ.pair(tree.perm[i], tree.perm[j], &e, nullptr);
          blk.dense(i - rn.begin, j - cn.begin) = e;
        } else {
          integ.pair(tree.perm[i], tree.perm[j], nullptr, &o);
          blk.dense.block<3, 3>(3 * (i - rn.begin), 3 * (j - cn.begin)) = o;
        }
      }
    }
  };

  std::function<void(int, int)> partition = [&](int rid, int cid) {
    const ClusterNode& rn = tree.nodes[rid];
    const ClusterNode& cn = tree.nodes[cid];
    if (admissible(rid, cid)) {
      HBlock blk;
      blk.row_node = rid;
      blk.col_node = cid;
      make_low_rank(rid, cid, blk);
      const Index m = rn.size() * mult, k = cn.size() * mult;
      if ((m + k) * blk.U.cols() < m * k) {
        blk.low_rank = true;
        H.blocks_.push_back(std::move(blk));
        return;
      }
    }
    if (rn.is_leaf() || cn.is_leaf()) {
      HBlock blk;
      blk.row_node = rid;
      blk.col_node = cid;
      make_dense(rid, cid, blk);
      H.blocks_.push_back(std::move(blk));
      return;
    }
    for (int a : rn.children)
      for (int b : cn.children) partition(a, b);
  };
  partition(0, 0);
  return H;
}

Matrix HMatrixApprox::gather(const Matrix& X) const {
  Matrix Xp(X.rows(), X.cols());
  for (Index t = 0; t < n_; ++t) Xp.row(t) = X.row(order_[t]);
  return Xp;
}

void HMatrixApprox::add_scatter(const Matrix& Yp, Matrix& Y) const {
  for (Index t = 0; t < n_; ++t) Y.row(order_[t]) += Yp.row(t);
}

Matrix HMatrixApprox::apply(const Matrix& X) const {
  if (X.rows() != n_)
    throw std::invalid_argument("hmatvec dimension mismatch: " + std::to_string(X.rows()) + " vs " +
                                std::to_string(n_));
  const Matrix Xp = gather(X);
  Matrix Yp = Matrix::Zero(n_, X.cols());
  for (const HBlock& b : blocks_) {
    const ClusterNode& rn = tree_.nodes[b.row_node];
    const ClusterNode& cn = tree_.nodes[b.col_node];
    auto ys = Yp.middleRows(rn.begin * mult_, rn.size() * mult_);
    const auto xs = Xp.middleRows(cn.begin * mult_, cn.size() * mult_);
    if (b.low_rank)
      ys.noalias() += b.U * (b.V.transpose() * xs);
    else
      ys.noalias() += b.dense * xs;
  }
  Matrix Y = Matrix::Zero(n_, X.cols());
  add_scatter(Yp, Y);
  return Y;
}

Vector HMatrixApprox::apply(const Vector& x) const {
  const Matrix X = x;
  return apply(X).col(0);
}

Matrix HMatrixApprox::apply_right(const Matrix& X) const {
  if (X.cols() != n_)
    throw std::invalid_argument("hmatvec dimension mismatch: " + std::to_string(X.cols()) + " vs " +
                                std::to_string(n_));
  Matrix Xp(X.rows(), n_);
  for (Index t = 0; t < n_; ++t) Xp.col(t) = X.col(order_[t]);
  Matrix Yp = Matrix::Zero(X.rows(), n_);
  for (const HBlock& b : blocks_) {
    const ClusterNode& rn = tree_.nodes[b.row_node];
    const ClusterNode& cn = tree_.nodes[b.col_node];
    auto ys = Yp.middleCols(rn.begin * mult_, rn.size() * mult_);
    const auto xs = Xp.middleCols(cn.begin * mult_, cn.size() * mult_);
    if (b.low_rank)
      ys.noalias() += (xs * b.V) * b.U.transpose();
    else
      ys.noalias() += xs * b.dense.transpose();
  }
  Matrix Y(X.rows(), n_);
  for (Index t = 0; t < n_; ++t) Y.col(order_[t]) = Yp.col(t);
  return Y;
}

Matrix HMatrixApprox::to_dense() const { return apply(Matrix(Matrix::Identity(n_, n_))); }

HStats HMatrixApprox::stats() const {
  HStats s;
  s.dense_bytes = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) * sizeof(double);
  for (const HBlock& b : blocks_) {
    if (b.low_rank) {
      ++s.low_rank_blocks;
      s.max_rank = std::max(s.max_rank, b.U.cols());
      s.stored_bytes += static_cast<std::size_t>(b.U.size() + b.V.size()) * sizeof(double);
    } else {
      ++s.dense_blocks;
      s.stored_bytes += static_cast<std::size_t>(b.dense.size()) * sizeof(double);
    }
  }
  return s;
}

}  // namespace rte
