#pragma once

#include <cstddef>
#include <vector>

#include "bt/pathfield.hpp"

namespace bt {

/// Linear transport along a path given by a frame field F:
/// H(t, s) = F⁻¹(t)·F(s).
///
/// F is only defined up to a constant left factor (see gauge_transform),
/// and every quantity derived from H is invariant under that freedom.
template <Scalar T>
class TransportLaw {
 public:
  /// Inverts every frame sample up front; a sample whose smallest singular
  /// value estimate is ≤ guard·‖F(s)‖ raises SingularFrame.
  explicit TransportLaw(MatrixField<T> frame, double guard = 1e-12);

  const MatrixField<T>& frame() const noexcept { return frame_; }
  const Grid& grid() const noexcept { return frame_.grid(); }
  std::size_t size() const noexcept { return frame_.size(); }
  std::size_t dimension() const noexcept { return frame_.dimension(); }
  const Matrix<T>& frame_inverse(std::size_t i) const { return inverses_[i]; }

 private:
  MatrixField<T> frame_;
  std::vector<Matrix<T>> inverses_;
};

/// Components u^i in the frame at grid position `at`.
template <Scalar T>
struct FibreVector {
  std::vector<T> components;
  std::size_t at = 0;
};

/// H(t, s) = F⁻¹(t)·F(s) between grid positions.
template <Scalar T>
Matrix<T> transport_matrix(const TransportLaw<T>& law, std::size_t t, std::size_t s);

/// H(t, s)·u, relocated to `t`. Requires u.at == s.
template <Scalar T>
FibreVector<T> apply(const TransportLaw<T>& law, std::size_t t, std::size_t s,
                     const FibreVector<T>& u);

/// F'(s) = Dg·F(s); leaves every transport matrix unchanged.
template <Scalar T>
TransportLaw<T> gauge_transform(const TransportLaw<T>& law, const Matrix<T>& gauge);

/// The gauge-equivalent law with F(s₀) = I.
template <Scalar T>
TransportLaw<T> canonicalize(const TransportLaw<T>& law);

}  // namespace bt
