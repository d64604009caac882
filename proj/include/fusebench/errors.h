// Copyright 2026 The FuseBench Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FUSEBENCH_ERRORS_H_
#define FUSEBENCH_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fusebench {

// Root of every error the library throws. The CLI maps the subclasses
// onto exit codes (see ExitCodeFor in tools/).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical precondition violated (empty input, zero frames, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Array extents disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Models disagree on feature width where the fusion mode needs one width.
class DimError : public Error {
 public:
  using Error::Error;
};

// Models disagree on frame count for one utterance.
class FrameError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, flag value or mode/parameter mismatch.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure. Message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed binary or text file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed file holding unusable values (NaN, Inf).
class DataError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Class id or token id outside the head's label space.
class LabelError : public Error {
 public:
  using Error::Error;
};

// Transcript admits no CTC alignment within the available frames.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Loss went non-finite during training.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace fusebench

#endif  // FUSEBENCH_ERRORS_H_
