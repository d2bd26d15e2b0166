#pragma once

#include <cstddef>

namespace wbhp {

/// Selects between the OpenMP kernel and its serial reference.
///
/// Every kernel that takes an Exec argument produces bit-identical output in
/// both modes: parallel loops only fill per-item slots, and all reductions run
/// afterwards in fixed item order.
enum class Exec { Serial, Parallel };

// Number of OpenMP threads available to Exec::Parallel kernels.
int max_threads();

}  // namespace wbhp
