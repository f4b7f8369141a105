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

#include "merlin/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "merlin/errors.h"
#include "merlin/io.h"
#include "merlin/metrics.h"
#include "merlin/random.h"

namespace merlin {

double RfPairScorer::score(const LabeledPair& pair, Protocol) const {
  const FreqRec fr = ws_.frequency_recency(pair.user, pair.as_of);
  return rf_predict(params_, fr.frequency, fr.recency_days);
}

PmfPairScorer::PmfPairScorer(const PmfParams& params, const Workspace& ws)
    : params_(params), ws_(ws) {
  for (const auto& id : ws.catalog.users.ids()) user_rows_.push_back(params.user_row(id));
  for (const auto& id : ws.catalog.movies.ids()) movie_rows_.push_back(params.movie_row(id));
}

void PmfPairScorer::require_protocol(Protocol mode) const {
  if (mode == Protocol::kColdStart) {
    throw ColdStartUnsupported("matrix factorization cannot score unseen movies");
  }
}

double PmfPairScorer::score(const LabeledPair& pair, Protocol mode) const {
  require_protocol(mode);
  const auto& m = movie_rows_[pair.movie];
  if (!m) {
    throw ColdStartUnsupported("matrix factorization has no vector for movie '" +
                               ws_.catalog.movies.id(pair.movie) + "'");
  }
  const auto& u = user_rows_[pair.user];
  if (!u) throw LookupError("unknown user '" + ws_.catalog.users.id(pair.user) + "'");
  return pmf_logit(params_, *u, *m);
}

std::vector<double> score_pairs(const PairScorer& scorer,
                                std::span<const LabeledPair> pairs,
                                Protocol mode, size_t threads) {
  scorer.require_protocol(mode);
  std::vector<double> scores(pairs.size());
  const size_t workers = std::clamp<size_t>(threads, 1, std::max<size_t>(1, pairs.size()));
  if (workers == 1) {
    for (size_t i = 0; i < pairs.size(); ++i) scores[i] = scorer.score(pairs[i], mode);
    return scores;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const size_t chunk = (pairs.size() + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const size_t end = std::min(pairs.size(), (w + 1) * chunk);
        for (size_t i = w * chunk; i < end; ++i) scores[i] = scorer.score(pairs[i], mode);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return scores;
}

std::vector<LabeledPair> eval_pairs(const Workspace& ws, Protocol mode,
                                    uint64_t seed, size_t neg_per_pos) {
  const bool in_matrix = mode == Protocol::kInMatrix;
  const AttendanceIndex& partition = in_matrix ? ws.test : ws.coldstart;
  auto pairs = sample_eval_set(partition, ws.all, ws.users, ws.movie_as_of,
                               neg_per_pos,
                               derive_seed(seed, {0xe7a1, in_matrix ? 1u : 2u}),
                               &ws.catalog.movies);
  if (in_matrix) {
    std::erase_if(pairs, [&](const LabeledPair& p) {
      return !ws.train.first_date(p.movie).has_value();
    });
  }
  return pairs;
}

EvalReport evaluate(const PairScorer& scorer, const Workspace& ws,
                    Protocol mode, uint64_t seed, size_t neg_per_pos,
                    size_t threads) {
  scorer.require_protocol(mode);
  const auto pairs = eval_pairs(ws, mode, seed, neg_per_pos);
  std::vector<uint8_t> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(p.label);
  const auto scores = score_pairs(scorer, pairs, mode, threads);
  EvalReport report;
  report.protocol = mode;
  report.model = std::string(scorer.name());
  report.n_pos = static_cast<size_t>(std::count(labels.begin(), labels.end(), 1));
  report.n_neg = labels.size() - report.n_pos;
  report.seed = seed;
  report.auc = auc(scores, labels);
  return report;
}

EvalReport make_unsupported_report(std::string_view model, Protocol mode,
                                   uint64_t seed) {
  EvalReport r;
  r.protocol = mode;
  r.model = std::string(model);
  r.auc = std::numeric_limits<double>::quiet_NaN();
  r.seed = seed;
  return r;
}

namespace {

std::string auc_text(double v, int digits) {
  if (std::isnan(v)) return "NA";
  if (digits < 0) return format_double(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string format_eval_csv(std::span<const EvalReport> reports) {
  std::string out = "protocol,model,auc,n_pos,n_neg,seed\n";
  for (const auto& r : reports) {
    out += std::string(protocol_name(r.protocol)) + "," + r.model + "," +
           auc_text(r.auc, -1) + "," + std::to_string(r.n_pos) + "," +
           std::to_string(r.n_neg) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

std::string format_eval_table(std::span<const EvalReport> reports) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-11s %-8s %7s %8s %8s %6s\n", "protocol",
                "model", "auc", "n_pos", "n_neg", "seed");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-11s %-8s %7s %8zu %8zu %6llu\n",
                  std::string(protocol_name(r.protocol)).c_str(), r.model.c_str(),
                  auc_text(r.auc, 4).c_str(), r.n_pos, r.n_neg,
                  static_cast<unsigned long long>(r.seed));
    out += line;
  }
  return out;
}

}  // namespace merlin
