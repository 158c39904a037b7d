/* Copyright 2026 The flexsched Authors
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

namespace flexsched {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. The message carries line/field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NoPath : public Error {
 public:
  using Error::Error;
};

class NegativeWeight : public Error {
 public:
  using Error::Error;
};

class InsufficientCapacity : public Error {
 public:
  using Error::Error;
};

class UnknownAllocation : public Error {
 public:
  using Error::Error;
};

class UnknownLink : public Error {
 public:
  using Error::Error;
};

class InfeasibleConfig : public Error {
 public:
  using Error::Error;
};

class DisconnectedTerminals : public Error {
 public:
  using Error::Error;
};

class DisconnectedClosure : public Error {
 public:
  using Error::Error;
};

/// No feasible allocation exists for a task. The network is left unchanged.
class Blocked : public Error {
 public:
  using Error::Error;
};

}  // namespace flexsched
