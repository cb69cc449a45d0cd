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

// A member of the partition-matroid family: at most one TP per user.

#ifndef HETNET_ASSOCIATION_H_
#define HETNET_ASSOCIATION_H_

#include <compare>
#include <string>
#include <vector>

namespace hetnet {

struct Tuple {
  int user = 0;
  int tp = 0;
  auto operator<=>(const Tuple&) const = default;
};

class Association {
 public:
  static constexpr int kUnassigned = -1;

  Association() = default;
  Association(int num_users, int num_tps);
  // From a per-user TP list; kUnassigned entries are left out.
  static Association FromTps(const std::vector<int>& tp_of_user, int num_tps);

  int num_users() const { return static_cast<int>(tp_of_user_.size()); }
  int num_tps() const { return static_cast<int>(users_of_tp_.size()); }
  int size() const { return size_; }
  bool IsComplete() const { return size_ == num_users(); }

  int tp_of(int k) const { return tp_of_user_[k]; }
  bool IsAssigned(int k) const { return tp_of_user_[k] != kUnassigned; }
  bool Contains(Tuple e) const { return tp_of_user_[e.user] == e.tp; }
  // Users on TP b in ascending order.
  const std::vector<int>& users_on(int b) const { return users_of_tp_[b]; }
  const std::vector<int>& tp_of_user() const { return tp_of_user_; }

  // Throws MatroidError if k already holds a TP.
  void Assign(int k, int b);
  void Unassign(int k);
  // Throws MatroidError if k is unassigned.
  void Move(int k, int b);

  // Lexicographic (user, tp) order.
  std::vector<Tuple> Tuples() const;
  std::string ToString() const;

  bool operator==(const Association& other) const {
    return tp_of_user_ == other.tp_of_user_ &&
           num_tps() == other.num_tps();
  }

 private:
  void CheckIndices(int k, int b) const;

  std::vector<int> tp_of_user_;
  std::vector<std::vector<int>> users_of_tp_;
  int size_ = 0;
};

}  // namespace hetnet

#endif  // HETNET_ASSOCIATION_H_
