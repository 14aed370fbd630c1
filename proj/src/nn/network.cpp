#include "grasp/nn/network.hpp"

#include <sstream>

namespace grasp::nn {

std::uint64_t fnv1a64(const std::string& text, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::array<int, 3>> NetworkSpec::conv_shapes() const {
  std::vector<std::array<int, 3>> out;
  int c = channels, h = height, w = width;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto& l = convs[i];
    if (l.filters < 1 || l.kernel < 1 || l.stride < 1)
      throw Error(ErrorKind::ShapeMismatch, "conv layer " + std::to_string(i) + " has non-positive parameters");
    h = kernels::conv_out(h, l.kernel, l.stride);
    w = kernels::conv_out(w, l.kernel, l.stride);
    c = l.filters;
    if (h < 1 || w < 1)
      throw Error(ErrorKind::ShapeMismatch, "conv layer " + std::to_string(i) + " shrinks the image below 1 pixel");
    out.push_back({c, h, w});
  }
  return out;
}

int NetworkSpec::feature_size() const {
  const auto shapes = conv_shapes();
  if (shapes.empty()) return channels * height * width;
  const auto& s = shapes.back();
  return s[0] * s[1] * s[2];
}

void NetworkSpec::validate() const {
  if (channels < 1 || height < 1 || width < 1) throw Error(ErrorKind::ShapeMismatch, "network input must be non-empty");
  if (action_dim < 1) throw Error(ErrorKind::ShapeMismatch, "action_dim must be >= 1");
  for (int h : hidden)
    if (h < 1) throw Error(ErrorKind::ShapeMismatch, "hidden widths must be >= 1");
  conv_shapes();
}

std::string NetworkSpec::describe() const {
  std::ostringstream os;
  os << "in=" << channels << "x" << height << "x" << width << ";conv=";
  for (const auto& l : convs) os << "(" << l.filters << "," << l.kernel << "," << l.stride << ")";
  os << ";hidden=";
  for (int h : hidden) os << h << ",";
  os << ";act=" << static_cast<int>(conv_activation) << static_cast<int>(hidden_activation);
  os << ";adim=" << action_dim << ";sepv=" << separate_value;
  return os.str();
}

std::uint64_t NetworkSpec::hash() const { return fnv1a64(describe()); }

NetworkSpec arch_preset(int resolution, int channels) {
  NetworkSpec spec;
  spec.channels = channels;
  spec.height = resolution;
  spec.width = resolution;
  const std::vector<ConvLayer> base80{{16, 8, 4}, {32, 4, 2}};
  switch (resolution) {
    case 32: spec.convs = {{4, 2, 4}, {8, 1, 2}}; break;
    case 80: spec.convs = base80; break;
    case 128:
      spec.convs = base80;
      spec.convs.push_back({64, 2, 1});
      break;
    case 256:
      spec.convs = base80;
      spec.convs.push_back({64, 2, 1});
      spec.convs.push_back({72, 2, 1});
      break;
    default:
      throw Error(ErrorKind::Unsupported, "no architecture preset for " + std::to_string(resolution) + " pixels");
  }
  spec.validate();
  return spec;
}

}  // namespace grasp::nn
