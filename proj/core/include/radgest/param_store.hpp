#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "radgest/tensor.hpp"

namespace radgest {

// Named, insertion-ordered collection of learnable tensors.
class ParamStore {
 public:
  // Registers a leaf tensor (marked requires_grad) and returns a handle to it.
  Tensor& add(const std::string& name, Tensor value);

  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  bool contains(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<Tensor>& tensors() { return entries_; }
  const std::vector<Tensor>& tensors() const { return entries_; }

  // Total scalar count over all tensors.
  std::size_t parameter_count() const;

  void zero_grad();
  void set_requires_grad(bool flag);

  // Rounds every value to the nearest binary32 so checkpoints are lossless.
  void round_to_float();

  // Deep copy with fresh nodes.
  ParamStore clone() const;

  bool bitwise_equal(const ParamStore& other) const;

 private:
  std::size_t index_of(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<Tensor> entries_;
};

}  // namespace radgest
