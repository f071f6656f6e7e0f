#pragma once

#include <optional>
#include <string>

#include "rft/convfield.hpp"

namespace rft {

/// RFLD container. Binary layout (little-endian):
///   "RFLD" | u16 version | u8 D | u32 dims[D] | f64 spacing[D] | u8 kind | body
///   kind 0 (mask):   u8 inclusion per lattice point
///   kind 1 (sample): u32 N | u8 inclusion per lattice point | f64 N x |V| values
///   kind 2 (field):  u32 r | u8 inclusion per lattice point | u8 has_gradient |
///                    f64 value per grid point | f64 D per grid point if gradients
/// The text variant starts with the line "RFLD-TEXT 1" and holds the same
/// fields as "key values..." lines followed by whitespace-separated data.
enum class ContainerKind { mask, sample, field };

struct Container {
  ContainerKind kind = ContainerKind::mask;
  MaskPtr mask;
  std::optional<LatticeSample> sample;
  std::optional<ScalarField> field;
};

Container read_container(const std::string& path);

void write_mask(const std::string& path, const Mask& mask, bool text = false);
void write_sample(const std::string& path, const LatticeSample& sample, bool text = false);
void write_field(const std::string& path, const ScalarField& field, bool text = false);

Mask read_mask(const std::string& path);
LatticeSample read_sample(const std::string& path);
ScalarField read_field(const std::string& path);

}  // namespace rft
