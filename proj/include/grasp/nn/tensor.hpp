#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "grasp/error.hpp"

namespace grasp::nn {

template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)), data(count(shape), fill) {}
  Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != count(shape)) throw Error(ErrorKind::ShapeMismatch, "tensor data does not match its shape");
  }

  static std::size_t count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::string shape_string(const std::vector<int>& shape);

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ShapeMismatch, what);
}

// Named weights with paired gradients, kept in insertion order.
template <class T>
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
  };

  // The returned reference is only valid until the next add().
  Tensor<T>& add(const std::string& name, std::vector<int> shape, T fill = T(0)) {
    if (index_.count(name)) throw Error(ErrorKind::Config, "duplicate parameter '" + name + "'");
    index_[name] = entries_.size();
    Tensor<T> v(shape, fill);
    entries_.push_back(Entry{name, v, Tensor<T>(shape)});
    return entries_.back().value;
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  Entry& entry(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::Config, "unknown parameter '" + name + "'");
    return entries_[it->second];
  }
  const Entry& entry(const std::string& name) const { return const_cast<ParameterSet*>(this)->entry(name); }

  Tensor<T>& value(const std::string& name) { return entry(name).value; }
  const Tensor<T>& value(const std::string& name) const { return entry(name).value; }
  Tensor<T>& grad(const std::string& name) { return entry(name).grad; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void zero_grad() {
    for (auto& e : entries_) e.grad.fill(T(0));
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  template <class U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& e : entries_) {
      auto& v = out.add(e.name, e.value.shape);
      v = e.value.template cast<U>();
    }
    return out;
  }

  // Flattened view over the entries selected by `keep` (all entries when empty), in order.
  std::vector<double> flat_values(const std::function<bool(const std::string&)>& keep = {}) const {
    return flatten(keep, [](const Entry& e) -> const Tensor<T>& { return e.value; });
  }
  std::vector<double> flat_grads(const std::function<bool(const std::string&)>& keep = {}) const {
    return flatten(keep, [](const Entry& e) -> const Tensor<T>& { return e.grad; });
  }
  void set_flat_values(const std::vector<double>& flat, const std::function<bool(const std::string&)>& keep = {}) {
    std::size_t k = 0;
    for (auto& e : entries_) {
      if (keep && !keep(e.name)) continue;
      for (auto& v : e.value.data) v = static_cast<T>(flat.at(k++));
    }
    if (k != flat.size()) throw Error(ErrorKind::ShapeMismatch, "flat parameter vector has the wrong length");
  }

 private:
  template <class Get>
  std::vector<double> flatten(const std::function<bool(const std::string&)>& keep, Get get) const {
    std::vector<double> out;
    for (const auto& e : entries_) {
      if (keep && !keep(e.name)) continue;
      const auto& t = get(e);
      out.insert(out.end(), t.data.begin(), t.data.end());
    }
    return out;
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

}  // namespace grasp::nn
