#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "finevq/nn/tape.hpp"

namespace finevq::nn {

// Owns a model's parameters in creation order. Addresses are stable, so
// layers may hold Param pointers.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Param& Add(std::string name, Matrix value, bool trainable);
  bool Has(std::string_view name) const;
  Param& Get(std::string_view name);
  const Param& Get(std::string_view name) const;

  std::vector<Param*> Trainable();
  std::size_t TrainableCount() const;  // scalar entries
  std::size_t size() const { return params_.size(); }
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }

  void ZeroGrad();

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::unordered_map<std::string, Param*> index_;
};

}  // namespace finevq::nn
