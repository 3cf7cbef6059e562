#include "bt/transport.hpp"

#include <string>

namespace bt {

template <Scalar T>
TransportLaw<T>::TransportLaw(MatrixField<T> frame, double guard) : frame_(std::move(frame)) {
  inverses_.reserve(frame_.size());
  for (std::size_t i = 0; i < frame_.size(); ++i) {
    try {
      inverses_.push_back(guarded_inverse(frame_[i], guard, ErrorKind::SingularFrame));
    } catch (const Error& e) {
      throw Error(ErrorKind::SingularFrame,
                  "frame sample " + std::to_string(i) + ": " + e.what());
    }
  }
}

template <Scalar T>
Matrix<T> transport_matrix(const TransportLaw<T>& law, std::size_t t, std::size_t s) {
  if (t >= law.size() || s >= law.size()) {
    throw Error(ErrorKind::DimensionMismatch, "transport_matrix: position off grid");
  }
  if (t == s) return Matrix<T>::identity(law.dimension());
  return law.frame_inverse(t) * law.frame()[s];
}

template <Scalar T>
FibreVector<T> apply(const TransportLaw<T>& law, std::size_t t, std::size_t s,
                     const FibreVector<T>& u) {
  if (u.at != s) {
    throw Error(ErrorKind::ValidationError, "apply: vector does not live at the source point");
  }
  if (u.components.size() != law.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "apply: vector dimension differs from the law");
  }
  return {transport_matrix(law, t, s) * u.components, t};
}

template <Scalar T>
TransportLaw<T> gauge_transform(const TransportLaw<T>& law, const Matrix<T>& gauge) {
  if (!gauge.is_square() || gauge.rows() != law.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "gauge_transform: gauge dimension mismatch");
  }
  guarded_inverse(gauge, 1e-12, ErrorKind::SingularGauge);
  std::vector<Matrix<T>> values;
  values.reserve(law.size());
  for (const auto& f : law.frame().values()) values.push_back(gauge * f);
  return TransportLaw<T>(MatrixField<T>(law.grid(), std::move(values)));
}

template <Scalar T>
TransportLaw<T> canonicalize(const TransportLaw<T>& law) {
  return gauge_transform(law, law.frame_inverse(0));
}

#define BT_INSTANTIATE_TRANSPORT(T)                                                        \
  template class TransportLaw<T>;                                                          \
  template Matrix<T> transport_matrix<T>(const TransportLaw<T>&, std::size_t, std::size_t); \
  template FibreVector<T> apply<T>(const TransportLaw<T>&, std::size_t, std::size_t,       \
                                   const FibreVector<T>&);                                 \
  template TransportLaw<T> gauge_transform<T>(const TransportLaw<T>&, const Matrix<T>&);   \
  template TransportLaw<T> canonicalize<T>(const TransportLaw<T>&);

BT_INSTANTIATE_TRANSPORT(double)
BT_INSTANTIATE_TRANSPORT(Complex)

#undef BT_INSTANTIATE_TRANSPORT

}  // namespace bt
