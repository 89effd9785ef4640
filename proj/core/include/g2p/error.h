// Copyright (c) 2026 The g2p Authors
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

#ifndef G2P_ERROR_H_
#define G2P_ERROR_H_

#include <stdexcept>
#include <string>

namespace g2p {

// Process exit codes used by the command line tool. Library code throws the
// matching exception type; main() maps it back to the code.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
  kCheckpoint = 5,
};

// Bad flags, missing arguments, inconsistent command invocations.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input files, empty pipelines, vocabulary mismatches.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite losses or gradients, unnormalizable attention rows.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Anything wrong with a checkpoint file. The reason distinguishes the
// failure so callers can report it precisely.
class CheckpointError : public std::runtime_error {
 public:
  enum class Reason { kMagic, kVersion, kTruncated, kChecksum, kMalformed };

  CheckpointError(Reason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}

  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

}  // namespace g2p

#endif  // G2P_ERROR_H_
