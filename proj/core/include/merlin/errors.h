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

#ifndef MERLIN_ERRORS_H_
#define MERLIN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace merlin {

// Base class for every error raised by the engine. `kind()` is a stable
// machine-readable tag; the CLI prints it as the first token of its error
// line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define MERLIN_DEFINE_ERROR(Name, tag)                                 \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(tag, message) {} \
  }

MERLIN_DEFINE_ERROR(ShapeError, "shape_error");
MERLIN_DEFINE_ERROR(InvalidArgument, "invalid_argument");
MERLIN_DEFINE_ERROR(TrainingFault, "training_fault");
MERLIN_DEFINE_ERROR(ParseError, "parse_error");
MERLIN_DEFINE_ERROR(EmptyDatasetError, "empty_dataset");
MERLIN_DEFINE_ERROR(SchemaError, "schema_error");
MERLIN_DEFINE_ERROR(ConfigError, "config_error");
MERLIN_DEFINE_ERROR(SamplingError, "sampling_error");
MERLIN_DEFINE_ERROR(EvaluationError, "evaluation_error");
MERLIN_DEFINE_ERROR(FormatError, "format_error");
MERLIN_DEFINE_ERROR(LookupError, "lookup_error");
MERLIN_DEFINE_ERROR(StateError, "state_error");
MERLIN_DEFINE_ERROR(MetricError, "metric_error");
MERLIN_DEFINE_ERROR(FitError, "fit_error");
MERLIN_DEFINE_ERROR(IoError, "io_error");

#undef MERLIN_DEFINE_ERROR

// Raised by models without a content path when asked to score a movie that
// has no learned representation.
class ColdStartUnsupported : public Error {
 public:
  explicit ColdStartUnsupported(const std::string& message)
      : Error("cold_start_unsupported", "cold-start unsupported: " + message) {}
};

}  // namespace merlin

#endif  // MERLIN_ERRORS_H_
