#include "povdae/partition.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "povdae/error.hpp"

namespace povdae {

double condition_number(const Eigen::MatrixXd& square) {
  if (square.rows() != square.cols()) {
    throw Error(ErrorCode::shape, "condition number needs a square matrix, got " + std::to_string(square.rows()) +
                                      "x" + std::to_string(square.cols()));
  }
  if (square.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(square);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (!(smallest >= 1e-300)) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

Eigen::MatrixXd instantaneous_basis(const Eigen::MatrixXd& rows, std::size_t variables, std::size_t n_dep) {
  const auto m = static_cast<Eigen::Index>(variables);
  const auto k = static_cast<Eigen::Index>(n_dep);
  if (rows.cols() < m || rows.cols() % m != 0) {
    throw Error(ErrorCode::shape, "basis columns are not a multiple of the variable count");
  }
  if (rows.rows() < k) {
    throw Error(ErrorCode::structural_mismatch, "basis has " + std::to_string(rows.rows()) + " unity rows but " +
                                                    std::to_string(n_dep) + " dependent variables were estimated");
  }
  if (k > m) throw Error(ErrorCode::structural_mismatch, "more dependent variables than variables");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows.leftCols(m), Eigen::ComputeFullV);
  return svd.matrixV().leftCols(k).transpose();
}

std::vector<PartitionResult> enumerate_partitions(const Eigen::MatrixXd& rows, std::size_t variables,
                                                  std::size_t n_dep, double threshold, std::uint64_t cap) {
  const std::uint64_t count = binomial(variables, n_dep);
  if (count > cap) {
    throw Error(ErrorCode::too_many_combinations,
                "C(" + std::to_string(variables) + ", " + std::to_string(n_dep) + ") exceeds the cap of " +
                    std::to_string(cap));
  }
  const Eigen::MatrixXd inst = instantaneous_basis(rows, variables, n_dep);
  const auto k = static_cast<Eigen::Index>(n_dep);
  std::vector<PartitionResult> out;
  out.reserve(static_cast<std::size_t>(count));
  for_each_combination(variables, n_dep, [&](const IndexSet& dep) {
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index c = 0; c < k; ++c) sub.col(c) = inst.col(static_cast<Eigen::Index>(dep[static_cast<std::size_t>(c)]));
    PartitionResult p;
    p.dependent = dep;
    p.condition = condition_number(sub);
    p.admissible = p.condition < threshold;
    p.free = complement(dep, variables);
    out.push_back(std::move(p));
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const PartitionResult& a, const PartitionResult& b) { return a.condition > b.condition; });
  return out;
}

std::vector<PartitionResult> enumerate_partitions(const ConstraintBasis& basis, std::size_t n_dep, double threshold,
                                                  std::uint64_t cap) {
  return enumerate_partitions(basis.rows, basis.variables, n_dep, threshold, cap);
}

SourceReport collect_sources(const std::vector<PartitionResult>& partitions, double threshold) {
  SourceReport report;
  report.threshold = threshold;
  std::copy_if(partitions.begin(), partitions.end(), std::back_inserter(report.admissible),
               [](const PartitionResult& p) { return p.admissible; });
  if (report.admissible.empty()) return report;
  IndexSet common = report.admissible.front().free;
  IndexSet all = common;
  for (std::size_t i = 1; i < report.admissible.size(); ++i) {
    const auto& f = report.admissible[i].free;
    IndexSet meet;
    std::set_intersection(common.begin(), common.end(), f.begin(), f.end(), std::back_inserter(meet));
    common = std::move(meet);
    IndexSet join;
    std::set_union(all.begin(), all.end(), f.begin(), f.end(), std::back_inserter(join));
    all = std::move(join);
  }
  report.unambiguous = common;
  std::set_difference(all.begin(), all.end(), common.begin(), common.end(), std::back_inserter(report.ambiguous));
  return report;
}

SourceReport classify_sources(const std::vector<PartitionResult>& partitions, double threshold) {
  auto report = collect_sources(partitions, threshold);
  if (report.admissible.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : partitions) best = std::min(best, p.condition);
    std::ostringstream msg;
    msg << "no partition has condition number below " << threshold << "; smallest found " << best;
    throw Error(ErrorCode::no_admissible_partition, msg.str());
  }
  return report;
}

}  // namespace povdae
