/* Copyright 2026 The Tracklab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace tracklab {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or inconsistent configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input files (annotations, images, checkpoints).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments passed to an operation.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Candidate-box labeling produced no positive cell.
class LabelingError : public Error {
public:
    using Error::Error;
};

/// Training diverged or hit a non-finite loss.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Metric computation had nothing to evaluate.
class EvalError : public Error {
public:
    using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tracklab
