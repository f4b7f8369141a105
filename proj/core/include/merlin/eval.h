// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MERLIN_EVAL_H_
#define MERLIN_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "merlin/baselines.h"
#include "merlin/data.h"
#include "merlin/model.h"
#include "merlin/workspace.h"

namespace merlin {

// A frozen model that scores (user, movie) pairs of one workspace. Scores
// only need to be monotone in the predicted attendance probability.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual std::string_view name() const = 0;
  // Throws ColdStartUnsupported when the model has no cold-start path.
  virtual void require_protocol(Protocol mode) const = 0;
  // Must be safe to call concurrently.
  virtual double score(const LabeledPair& pair, Protocol mode) const = 0;
};

class MerlinPairScorer final : public PairScorer {
 public:
  MerlinPairScorer(const MerlinParams& params, const Workspace& ws)
      : scorer_(params, ws) {}
  std::string_view name() const override { return "merlin"; }
  void require_protocol(Protocol) const override {}
  double score(const LabeledPair& pair, Protocol mode) const override {
    return scorer_.score(pair, mode).probability;
  }

 private:
  MerlinScorer scorer_;
};

class RfPairScorer final : public PairScorer {
 public:
  RfPairScorer(const RfParams& params, const Workspace& ws)
      : params_(params), ws_(ws) {}
  std::string_view name() const override { return "rf"; }
  void require_protocol(Protocol) const override {}
  double score(const LabeledPair& pair, Protocol mode) const override;

 private:
  RfParams params_;
  const Workspace& ws_;
};

class PmfPairScorer final : public PairScorer {
 public:
  PmfPairScorer(const PmfParams& params, const Workspace& ws);
  std::string_view name() const override { return "pmf"; }
  void require_protocol(Protocol mode) const override;
  double score(const LabeledPair& pair, Protocol mode) const override;

 private:
  const PmfParams& params_;
  const Workspace& ws_;
  std::vector<std::optional<size_t>> user_rows_;
  std::vector<std::optional<size_t>> movie_rows_;
};

// Scores every pair, splitting the work over `threads` workers. The result
// does not depend on the thread count. The first worker exception is
// rethrown.
std::vector<double> score_pairs(const PairScorer& scorer,
                                std::span<const LabeledPair> pairs,
                                Protocol mode, size_t threads = 1);

struct EvalReport {
  Protocol protocol = Protocol::kInMatrix;
  std::string model;
  double auc = 0.0;
  size_t n_pos = 0;
  size_t n_neg = 0;
  uint64_t seed = 0;
};

// Eval pairs for a protocol: the test partition restricted to movies with
// training attendance, or the cold-start partition. Identical for every
// model given the seed.
std::vector<LabeledPair> eval_pairs(const Workspace& ws, Protocol mode,
                                    uint64_t seed, size_t neg_per_pos = 9);

EvalReport evaluate(const PairScorer& scorer, const Workspace& ws,
                    Protocol mode, uint64_t seed, size_t neg_per_pos = 9,
                    size_t threads = 1);
inline EvalReport evaluate_in_matrix(const PairScorer& scorer,
                                     const Workspace& ws, uint64_t seed,
                                     size_t threads = 1) {
  return evaluate(scorer, ws, Protocol::kInMatrix, seed, 9, threads);
}
inline EvalReport evaluate_coldstart(const PairScorer& scorer,
                                     const Workspace& ws, uint64_t seed,
                                     size_t threads = 1) {
  return evaluate(scorer, ws, Protocol::kColdStart, seed, 9, threads);
}

// CSV `protocol,model,auc,n_pos,n_neg,seed`. An unsupported protocol is a
// row with auc "NA" and zero counts, produced by make_unsupported_report.
EvalReport make_unsupported_report(std::string_view model, Protocol mode,
                                   uint64_t seed);
std::string format_eval_csv(std::span<const EvalReport> reports);
std::string format_eval_table(std::span<const EvalReport> reports);

}  // namespace merlin

#endif  // MERLIN_EVAL_H_
