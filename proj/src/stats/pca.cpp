#include <cmath>

#include "renewcast/error.hpp"
#include "renewcast/stats.hpp"

namespace renewcast::stats {

namespace {

struct Decomposition {
  Vector mean;
  Matrix directions;  // d x r, columns are right singular vectors
  Vector ratios;      // r
  bool rank_deficient = false;
};

Decomposition decompose(const Matrix& data) {
  if (data.rows() < 2) throw Error(ErrorCode::kTooFewSamples, "PCA needs at least two rows");
  if (data.cols() < 1) throw Error(ErrorCode::kDimensionMismatch, "PCA needs at least one column");
  Decomposition out;
  out.mean = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - out.mean.transpose();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  const double total = s.squaredNorm();
  if (!(total > 0.0)) throw Error(ErrorCode::kDegenerateSeries, "PCA input has zero variance");
  out.ratios = s.array().square() / total;
  out.directions = svd.matrixV();
  const double tol = s(0) * 1e-10 * static_cast<double>(std::max(data.rows(), data.cols()));
  out.rank_deficient = (s.array() <= tol).any() || data.rows() <= data.cols();
  // Largest-magnitude loading of each component is positive.
  for (Eigen::Index j = 0; j < out.directions.cols(); ++j) {
    Eigen::Index arg = 0;
    out.directions.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.directions(arg, j) < 0.0) out.directions.col(j) *= -1.0;
  }
  return out;
}

PcaModel keep(Decomposition&& dec, std::size_t k) {
  PcaModel model;
  model.mean = std::move(dec.mean);
  model.components = dec.directions.leftCols(static_cast<Eigen::Index>(k)).transpose();
  model.explained_variance_ratio = dec.ratios.head(static_cast<Eigen::Index>(k));
  model.all_ratios = std::move(dec.ratios);
  model.rank_deficient = dec.rank_deficient;
  return model;
}

}  // namespace

PcaModel pca_fit(const Matrix& data, double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "variance target must lie in (0, 1]");
  }
  Decomposition dec = decompose(data);
  const auto r = static_cast<std::size_t>(dec.ratios.size());
  std::size_t k = r;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    cumulative += dec.ratios(static_cast<Eigen::Index>(i));
    if (cumulative >= variance_target - 1e-12) {
      k = i + 1;
      break;
    }
  }
  return keep(std::move(dec), k);
}

PcaModel pca_fit_components(const Matrix& data, std::size_t k) {
  Decomposition dec = decompose(data);
  if (k == 0 || k > static_cast<std::size_t>(dec.ratios.size())) {
    throw Error(ErrorCode::kInvalidArgument, "component count out of range");
  }
  return keep(std::move(dec), k);
}

Matrix pca_project(const PcaModel& model, const Matrix& data) {
  if (static_cast<std::size_t>(data.cols()) != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "expected " + std::to_string(model.input_dim()) +
                                                   " columns, got " + std::to_string(data.cols()));
  }
  return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores) {
  if (static_cast<std::size_t>(scores.cols()) != model.n_components()) {
    throw Error(ErrorCode::kDimensionMismatch, "score width does not match component count");
  }
  return (scores * model.components).rowwise() + model.mean.transpose();
}

}  // namespace renewcast::stats
