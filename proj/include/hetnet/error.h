// Copyright 2026 The HetNet-AF Authors.
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

#ifndef HETNET_ERROR_H_
#define HETNET_ERROR_H_

#include <stdexcept>
#include <string>

namespace hetnet {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a documented invariant (bad weights, negative gains).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file could not be parsed against its schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

// An operation would leave the partition-matroid family (two TPs for one
// user, swap between different users, ...).
class MatroidError : public Error {
 public:
  using Error::Error;
};

// A numerical solve failed: iteration cap, singular system, bad structure.
class SolverError : public Error {
 public:
  using Error::Error;
};

// No strictly feasible point exists for a convex program.
class InfeasibleError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace hetnet

#endif  // HETNET_ERROR_H_
