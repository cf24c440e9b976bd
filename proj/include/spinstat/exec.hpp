#pragma once

namespace spinstat {

// Selects the serial reference loop or the OpenMP kernel. Both paths produce
// bitwise-identical results; the serial one is kept for tests and benchmarks.
enum class Exec { Serial, Parallel };

}  // namespace spinstat
