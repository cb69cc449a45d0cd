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

#include "hetnet/association.h"

#include <algorithm>
#include <sstream>

#include "hetnet/error.h"

namespace hetnet {

Association::Association(int num_users, int num_tps)
    : tp_of_user_(num_users, kUnassigned), users_of_tp_(num_tps) {
  if (num_users < 0 || num_tps < 0) {
    throw ValidationError("negative association dimensions");
  }
}

Association Association::FromTps(const std::vector<int>& tp_of_user,
                                 int num_tps) {
  Association a(static_cast<int>(tp_of_user.size()), num_tps);
  for (int k = 0; k < a.num_users(); ++k) {
    if (tp_of_user[k] != kUnassigned) a.Assign(k, tp_of_user[k]);
  }
  return a;
}

void Association::CheckIndices(int k, int b) const {
  if (k < 0 || k >= num_users()) {
    throw MatroidError("user " + std::to_string(k) + " out of range");
  }
  if (b < 0 || b >= num_tps()) {
    throw MatroidError("TP " + std::to_string(b) + " out of range");
  }
}

void Association::Assign(int k, int b) {
  CheckIndices(k, b);
  if (tp_of_user_[k] != kUnassigned) {
    throw MatroidError("user " + std::to_string(k) +
                       " already associated with TP " +
                       std::to_string(tp_of_user_[k]));
  }
  tp_of_user_[k] = b;
  auto& users = users_of_tp_[b];
  users.insert(std::lower_bound(users.begin(), users.end(), k), k);
  ++size_;
}

void Association::Unassign(int k) {
  CheckIndices(k, 0);
  const int b = tp_of_user_[k];
  if (b == kUnassigned) return;
  auto& users = users_of_tp_[b];
  users.erase(std::lower_bound(users.begin(), users.end(), k));
  tp_of_user_[k] = kUnassigned;
  --size_;
}

void Association::Move(int k, int b) {
  CheckIndices(k, b);
  if (tp_of_user_[k] == kUnassigned) {
    throw MatroidError("cannot move unassociated user " + std::to_string(k));
  }
  Unassign(k);
  Assign(k, b);
}

std::vector<Tuple> Association::Tuples() const {
  std::vector<Tuple> out;
  out.reserve(size_);
  for (int k = 0; k < num_users(); ++k) {
    if (tp_of_user_[k] != kUnassigned) out.push_back({k, tp_of_user_[k]});
  }
  return out;
}

std::string Association::ToString() const {
  std::ostringstream s;
  s << "[";
  for (int k = 0; k < num_users(); ++k) {
    if (k) s << " ";
    if (tp_of_user_[k] == kUnassigned) {
      s << "-";
    } else {
      s << tp_of_user_[k];
    }
  }
  s << "]";
  return s.str();
}

}  // namespace hetnet
