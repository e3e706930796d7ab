#pragma once

#include <cstdint>
#include <map>

namespace covconv {

// Multiplicities m_{n,j} of the spin-j irreducible in the n-fold tensor power
// of the SO(3) vector representation.
struct MultiplicityTable {
  int n = 0;
  std::map<int, std::uint64_t> entries;  // j -> m_{n,j}, zero entries omitted

  std::uint64_t at(int j) const {
    const auto it = entries.find(j);
    return it == entries.end() ? 0 : it->second;
  }
};

inline constexpr int kMaxTensorPower = 20;

// Exact Clebsch-Gordan recursion j (x) 1 = (j-1) + j + (j+1), 0 (x) 1 = 1.
MultiplicityTable so3_tensor_multiplicities(int n);

// Character integral (1/pi) int_0^pi chi_1(t)^n chi_j(t) (1 - cos t) dt on
// a uniform grid of `grid` intervals, unrounded.
double so3_character_multiplicity(int n, int j, int grid = 4096);

}  // namespace covconv
