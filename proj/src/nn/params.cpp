#include "finevq/nn/params.hpp"

#include "finevq/error.hpp"

namespace finevq::nn {

Param& ParamStore::Add(std::string name, Matrix value, bool trainable) {
  if (index_.count(name)) throw ValidationError("duplicate parameter '" + name + "'");
  auto p = std::make_unique<Param>();
  p->name = std::move(name);
  p->value = std::move(value);
  p->trainable = trainable;
  Param* raw = p.get();
  index_[raw->name] = raw;
  params_.push_back(std::move(p));
  return *raw;
}

bool ParamStore::Has(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

Param& ParamStore::Get(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ValidationError("no parameter '" + std::string(name) + "'");
  return *it->second;
}

const Param& ParamStore::Get(std::string_view name) const {
  return const_cast<ParamStore*>(this)->Get(name);
}

std::vector<Param*> ParamStore::Trainable() {
  std::vector<Param*> out;
  for (auto& p : params_) {
    if (p->trainable) out.push_back(p.get());
  }
  return out;
}

std::size_t ParamStore::TrainableCount() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p->trainable) n += p->value.size();
  }
  return n;
}

void ParamStore::ZeroGrad() {
  for (auto& p : params_) {
    if (p->trainable) p->ZeroGrad();
  }
}

}  // namespace finevq::nn
