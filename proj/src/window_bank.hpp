#pragma once

// Scoring of one utterance's max-pooled windows of a fixed length against
// clip vectors. Internal to the library; exposed to tests for path coverage.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "termscope/embedding_store.hpp"
#include "termscope/sliding_retrieval.hpp"

namespace termscope::detail {

// Dense evaluates every window with a full dot product. Sparse carries each
// clip's dot product from window i-1 to window i by touching only the
// dimensions whose window maximum changed. Auto picks Sparse when changes
// cover at most 1/16 of all window entries. The choice depends only on the
// utterance and window length, so every caller sees the same scores.
enum class BankMode { Auto, Dense, Sparse };

struct ClipQuery {
  const double* pooled;
  double norm;
  SimilarityResult* out;
};

class WindowBank {
 public:
  WindowBank(const EmbeddingSequence& utterance, std::uint32_t len, BankMode mode = BankMode::Auto);

  std::uint32_t len() const noexcept { return len_; }
  std::size_t count() const noexcept { return count_; }
  bool sparse() const noexcept { return sparse_; }

  // Writes max-score / earliest-argmax results through each query's `out`.
  void score(std::span<ClipQuery> queries) const;

 private:
  // Returns false when `bounded` and the change list outgrows the sparse budget.
  bool build(const EmbeddingSequence& utterance, bool sparse, bool bounded);
  void score_dense(std::span<ClipQuery> queries) const;
  void score_sparse(ClipQuery& query) const;
  const double* dense_row(std::size_t i) const { return dense_.data() + i * dim_; }

  std::uint32_t len_ = 0;
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  bool sparse_ = false;
  std::vector<double> norms_;
  std::vector<double> dense_;  // all windows (Dense) or window 0 only (Sparse)
  // Sparse: changes from window i-1 to i live in [offsets_[i-1], offsets_[i]).
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> change_dim_;
  std::vector<double> change_delta_;
};

}  // namespace termscope::detail
