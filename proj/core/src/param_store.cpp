#include "radgest/param_store.hpp"

#include <algorithm>
#include <cstring>

#include "radgest/error.hpp"

namespace radgest {

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ArgumentError("duplicate parameter name '" + name + "'");
  value.set_requires_grad(true);
  names_.push_back(name);
  entries_.push_back(std::move(value));
  return entries_.back();
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ArgumentError("unknown parameter '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

const Tensor& ParamStore::get(const std::string& name) const { return entries_[index_of(name)]; }
Tensor& ParamStore::get(const std::string& name) { return entries_[index_of(name)]; }

bool ParamStore::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : entries_) n += t.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (Tensor& t : entries_) t.zero_grad();
}

void ParamStore::set_requires_grad(bool flag) {
  for (Tensor& t : entries_) t.set_requires_grad(flag);
}

void ParamStore::round_to_float() {
  for (Tensor& t : entries_) {
    for (double& v : t.mutable_data()) v = static_cast<double>(static_cast<float>(v));
  }
}

ParamStore ParamStore::clone() const {
  ParamStore copy;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    Tensor t = entries_[i].detach();
    t.set_requires_grad(entries_[i].requires_grad());
    copy.names_.push_back(names_[i]);
    copy.entries_.push_back(std::move(t));
  }
  return copy;
}

bool ParamStore::bitwise_equal(const ParamStore& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto a = entries_[i].data();
    const auto b = other.entries_[i].data();
    if (entries_[i].shape() != other.entries_[i].shape()) return false;
    if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace radgest
