#include "rodkit/successor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "rodkit/errors.hpp"

namespace rod {

SRMatrix sr_closed_form(const Matrix& transition, double gamma) {
  const auto n = transition.rows();
  if (transition.cols() != n) throw ShapeError("transition matrix must be square");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw PreconditionError("gamma must lie in [0,1)");
  const Matrix system = Matrix::Identity(n, n) - gamma * transition;
  Matrix psi = system.partialPivLu().solve(Matrix::Identity(n, n));
  if (!psi.allFinite()) throw NumericError("SR solve produced non-finite values");
  return {std::move(psi), gamma, SRSource::ClosedForm};
}

SRMatrix sr_td_learn(std::span<const TransitionRecord> data, int n_states, double eta, double gamma,
                     int passes) {
  if (!(eta > 0.0 && eta <= 1.0)) throw PreconditionError("eta must lie in (0,1]");
  if (data.empty()) throw PreconditionError("sr_td_learn needs a non-empty dataset");
  for (const auto& t : data)
    if (t.s < 0 || t.s >= n_states || t.s_next < 0 || t.s_next >= n_states)
      throw ShapeError("transition state out of range");
  // Row-major storage so each update touches a contiguous row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> psi =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(n_states, n_states);
  Eigen::RowVectorXd delta(n_states);
  for (int pass = 0; pass < passes; ++pass) {
    for (const auto& t : data) {
      delta = gamma * psi.row(t.s_next) - psi.row(t.s);
      delta(t.s) += 1.0;
      psi.row(t.s) += eta * delta;
    }
  }
  return {Matrix(psi), gamma, SRSource::TD};
}

namespace {

void fix_sign(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-10 * scale) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

// Deterministic orthonormal basis of span(cols): orthogonalised projections of
// e_0, e_1, ... onto the span.
Matrix canonical_basis(const Matrix& cols) {
  const auto n = cols.rows();
  const auto k = cols.cols();
  Matrix out(n, k);
  Eigen::Index found = 0;
  for (Eigen::Index s = 0; s < n && found < k; ++s) {
    Vector x = cols * cols.row(s).transpose();
    for (int round = 0; round < 2; ++round)
      for (Eigen::Index j = 0; j < found; ++j) x -= out.col(j).dot(x) * out.col(j);
    const double norm = x.norm();
    if (norm < 1e-6) continue;
    out.col(found++) = x / norm;
  }
  if (found < k) throw NumericError("could not build a basis for a repeated eigenvalue");
  return out;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters_of(const Vector& sorted_values, double tol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i <= sorted_values.size(); ++i) {
    if (i == sorted_values.size() || std::abs(sorted_values(i) - sorted_values(i - 1)) > tol) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

double cluster_tolerance(const Vector& values) {
  return 1e-8 * std::max(1.0, values.cwiseAbs().maxCoeff());
}

}  // namespace

EigenBasis eigendecompose(const Matrix& m, bool symmetrize, EigenOrder order, BasisSource source) {
  if (m.rows() != m.cols()) throw ShapeError("eigendecompose needs a square matrix");
  if (!m.allFinite()) throw NumericError("matrix has non-finite entries");
  const auto n = m.rows();
  Vector values(n);
  Matrix vectors(n, n);
  if (symmetrize) {
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  } else {
    Eigen::EigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed");
    const double max_imag = std::max(solver.eigenvalues().imag().cwiseAbs().maxCoeff(),
                                     solver.eigenvectors().imag().cwiseAbs().maxCoeff());
    if (max_imag > 1e-9) warn("eigendecompose: discarding imaginary parts up to " + std::to_string(max_imag));
    values = solver.eigenvalues().real();
    vectors = solver.eigenvectors().real();
  }

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return order == EigenOrder::Descending ? values(a) > values(b) : values(a) < values(b);
  });
  EigenBasis out;
  out.source = source;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = values(idx[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = vectors.col(idx[static_cast<std::size_t>(i)]);
  }

  for (const auto& [begin, end] : clusters_of(out.values, cluster_tolerance(out.values))) {
    const auto k = end - begin;
    if (k == 1) {
      const double norm = out.vectors.col(begin).norm();
      if (norm > 0.0) out.vectors.col(begin) /= norm;
    } else {
      Eigen::HouseholderQR<Matrix> qr(out.vectors.middleCols(begin, k));
      const Matrix q = qr.householderQ() * Matrix::Identity(n, k);
      out.vectors.middleCols(begin, k) = canonical_basis(q);
    }
    for (Eigen::Index i = begin; i < end; ++i) fix_sign(out.vectors.col(i));
  }
  return out;
}

Matrix adjacency_matrix(const TabularMDP& mdp) {
  const int n = mdp.num_states();
  Matrix w = Matrix::Zero(n, n);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < mdp.num_actions(); ++a)
      for (const auto& succ : mdp.successors(s, a))
        if (succ.state != s) w(s, succ.state) = 1.0;
  return w;
}

LaplacianResult normalized_laplacian(const Matrix& adjacency) {
  const auto n = adjacency.rows();
  if (adjacency.cols() != n) throw ShapeError("adjacency matrix must be square");
  if ((adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw PreconditionError("adjacency matrix must be symmetric");
  if ((adjacency.array() < 0.0).any()) throw PreconditionError("adjacency matrix must be nonnegative");
  const Vector degree = adjacency.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(degree(i) > 0.0)) throw DegreeError("vertex " + std::to_string(i) + " has no neighbours");
  const Vector inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Matrix lap = -adjacency;
  lap.diagonal() += degree;
  lap = inv_sqrt.asDiagonal() * lap * inv_sqrt.asDiagonal();
  LaplacianResult out;
  out.basis = eigendecompose(lap, true, EigenOrder::Ascending, BasisSource::Laplacian);
  out.laplacian = std::move(lap);
  return out;
}

double principal_angle(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("principal_angle: row mismatch");
  if (a.cols() == 0 || b.cols() == 0) return 0.0;
  // sin of the largest angle between span(b) and span(a).
  const Matrix residual = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Matrix> svd(residual);
  const double s = std::min(1.0, svd.singularValues()(0));
  const double angle_ab = std::asin(s);
  const Matrix residual_ba = a - b * (b.transpose() * a);
  Eigen::JacobiSVD<Matrix> svd_ba(residual_ba);
  return std::max(angle_ab, std::asin(std::min(1.0, svd_ba.singularValues()(0))));
}

PvfEquivalenceReport verify_pvf_sr_equivalence(const TabularMDP& mdp, double gamma) {
  if (!mdp.deterministic()) throw PreconditionError("equivalence check needs deterministic dynamics");
  if (!(gamma > 0.0 && gamma < 1.0)) throw PreconditionError("gamma must lie in (0,1)");
  const Matrix w = adjacency_matrix(mdp);
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw PreconditionError("equivalence check needs symmetric reachability");
  const auto n = w.rows();
  const Vector degree = w.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(degree(i) > 0.0)) throw DegreeError("vertex " + std::to_string(i) + " has no neighbours");
  const Matrix walk = degree.cwiseInverse().asDiagonal() * w;
  const Matrix psi = sr_closed_form(walk, gamma).psi;

  const LaplacianResult pvf = normalized_laplacian(w);
  Eigen::EigenSolver<Matrix> solver(psi);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed on the SR");
  Vector sr_values = solver.eigenvalues().real();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return sr_values(a) > sr_values(b); });
  const Matrix sr_vectors_raw = solver.eigenvectors().real();

  PvfEquivalenceReport report;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lsr = sr_values(idx[static_cast<std::size_t>(i)]);
    const double predicted = 1.0 - (1.0 - 1.0 / lsr) / gamma;
    report.eigenvalue_residuals.push_back(std::abs(pvf.basis.values(i) - predicted));
  }

  const Vector sqrt_degree = degree.cwiseSqrt();
  for (const auto& [begin, end] : clusters_of(pvf.basis.values, 1e-6)) {
    const auto k = end - begin;
    Matrix sr_span(n, k);
    if (k == 1) {
      sr_span.col(0) = sr_vectors_raw.col(idx[static_cast<std::size_t>(begin)]);
    } else {
      double mean = 0.0;
      for (Eigen::Index i = begin; i < end; ++i) mean += sr_values(idx[static_cast<std::size_t>(i)]);
      mean /= static_cast<double>(k);
      Matrix shifted = psi;
      shifted.diagonal().array() -= mean;
      Eigen::BDCSVD<Matrix> svd(shifted, Eigen::ComputeFullV);
      sr_span = svd.matrixV().rightCols(k);
    }
    const Matrix mapped = sqrt_degree.asDiagonal() * sr_span;
    Eigen::HouseholderQR<Matrix> qr(mapped);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    const double angle = principal_angle(pvf.basis.vectors.middleCols(begin, k), q);
    report.subspace_angles.push_back(angle);
  }
  report.clusters = static_cast<int>(report.subspace_angles.size());
  for (double r : report.eigenvalue_residuals) report.max_residual = std::max(report.max_residual, r);
  for (double a : report.subspace_angles) report.max_angle = std::max(report.max_angle, a);
  return report;
}

TransitionDataset full_transition_sweep(const TabularMDP& mdp) {
  if (!mdp.deterministic()) throw PreconditionError("full sweep needs deterministic dynamics");
  TransitionDataset out;
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a) out.append({s, a, 0.0, mdp.next_state(s, a), true});
  return out;
}

TransitionLaplacianReport verify_transition_diff_laplacian(const TransitionDataset& data, const TabularMDP& mdp) {
  const int n = mdp.num_states();
  data.validate(n, mdp.num_actions());
  const Matrix w = adjacency_matrix(mdp);

  std::map<std::pair<int, int>, int> seen;
  for (const auto& t : data.records()) {
    if (!t.primitive) throw PreconditionError("dataset must hold primitive transitions only");
    if (mdp.prob(t.s, t.a, t.s_next) <= 0.0) throw PreconditionError("transition not allowed by the kernel");
    if (t.s != t.s_next) ++seen[{t.s, t.s_next}];
  }
  for (const auto& [edge, count] : seen)
    if (count != 1)
      throw PreconditionError("transition " + std::to_string(edge.first) + "->" + std::to_string(edge.second) +
                              " sampled " + std::to_string(count) + " times");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) > 0.0 && !seen.count({i, j}))
        throw PreconditionError("transition " + std::to_string(i) + "->" + std::to_string(j) + " missing");

  const auto rows = static_cast<Eigen::Index>(data.size());
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> t_int =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows, n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& rec = data[static_cast<std::size_t>(r)];
    t_int(r, rec.s_next) += 1;
    t_int(r, rec.s) -= 1;
  }
  const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> gram = t_int.transpose() * t_int;
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> lap2 =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) > 0.0) {
        lap2(i, j) -= 2;
        lap2(i, i) += 2;
      }

  TransitionLaplacianReport report;
  report.gram_matches = gram == lap2;

  Matrix combinatorial = -w;
  combinatorial.diagonal() += w.rowwise().sum();
  const EigenBasis lap = eigendecompose(combinatorial, true, EigenOrder::Ascending, BasisSource::Laplacian);
  Eigen::BDCSVD<Matrix> svd(t_int.cast<double>(), Eigen::ComputeFullV);
  // Singular values come out descending; squared and halved they are the
  // Laplacian eigenvalues in reverse order. Rows < n leave zero singular values.
  Vector half_sq = Vector::Zero(n);
  const auto& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size() && i < n; ++i) half_sq(i) = 0.5 * sv(i) * sv(i);
  const Matrix v = svd.matrixV().rowwise().reverse();
  const Vector mu = half_sq.reverse();
  for (Eigen::Index i = 0; i < n; ++i)
    report.max_value_residual = std::max(report.max_value_residual, std::abs(mu(i) - lap.values(i)));
  for (const auto& [begin, end] : clusters_of(lap.values, 1e-6)) {
    const auto k = end - begin;
    report.max_angle = std::max(report.max_angle,
                                principal_angle(lap.vectors.middleCols(begin, k), v.middleCols(begin, k)));
  }
  return report;
}

SFMatrix successor_features(const Matrix& phi, const Matrix& transition, double gamma) {
  const auto n = transition.rows();
  if (transition.cols() != n || phi.rows() != n) throw ShapeError("successor_features: shape mismatch");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw PreconditionError("gamma must lie in [0,1)");
  const Matrix system = Matrix::Identity(n, n) - gamma * transition;
  return {system.partialPivLu().solve(phi), phi};
}

}  // namespace rod
