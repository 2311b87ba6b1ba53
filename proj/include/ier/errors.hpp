/**
 * SPDX-FileCopyrightText: Copyright (c) 2026, The IER Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace ier {

// Root of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

// Chain append with the wrong node/edge ordinal.
class SequencingError : public Error {
  public:
    using Error::Error;
};

// An operation needed data that has not been produced yet (e.g. an unscored shortcut).
class InvalidState : public Error {
  public:
    using Error::Error;
};

// Ratio or mean over an empty population.
class UndefinedMetric : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), message_(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

  private:
    std::string message_;
    std::size_t line_;
};

// Failure of a nondeterministic service: chat agent, remote embedder, HTTP transport.
// Carries the raw response body and HTTP status when one was received.
class BackendError : public Error {
  public:
    explicit BackendError(const std::string& what, std::string raw = {},
                          std::optional<int> status = std::nullopt)
        : Error(what), raw_(std::move(raw)), status_(status) {}

    const std::string& raw_response() const noexcept { return raw_; }
    std::optional<int> status() const noexcept { return status_; }

  private:
    std::string raw_;
    std::optional<int> status_;
};

// Scripted backend lookup miss.
class FixtureError : public BackendError {
  public:
    using BackendError::BackendError;
};

}  // namespace ier
