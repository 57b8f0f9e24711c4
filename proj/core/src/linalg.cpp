#include "linalg.hpp"

#include <vector>

#include "vecgee/errors.hpp"

namespace vecgee::detail {

namespace {

[[noreturn]] void throw_rank_deficient(const Eigen::MatrixXd& a,
                                       std::span<const std::string> slot_names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(kRankThreshold);
  const auto rank = qr.rank();
  std::vector<std::size_t> slots;
  std::string listed;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = rank; j < a.cols(); ++j) {
    const auto slot = static_cast<std::size_t>(perm(j));
    slots.push_back(slot);
    if (!listed.empty()) listed += ", ";
    listed += slot < slot_names.size() ? slot_names[slot] : "slot " + std::to_string(slot);
  }
  if (slots.empty()) {
    // Numerically indefinite but not detectably rank deficient: blame all.
    for (Eigen::Index j = 0; j < a.cols(); ++j) slots.push_back(static_cast<std::size_t>(j));
    listed = "all slots";
  }
  throw RankDeficiencyError("singular scoring matrix; dependent coefficients: " + listed,
                            std::move(slots));
}

}  // namespace

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs,
                          std::span<const std::string> slot_names) {
  if (a.rows() == 0) return Eigen::MatrixXd(0, rhs.cols());
  if (!a.allFinite()) throw_rank_deficient(Eigen::MatrixXd::Zero(a.rows(), a.cols()), slot_names);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < a.rows()) throw_rank_deficient(a, slot_names);

  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);

  const double jitter = 1e-10 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd jittered = a;
  jittered.diagonal().array() += jitter;
  llt.compute(jittered);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  throw_rank_deficient(a, slot_names);
}

}  // namespace vecgee::detail
