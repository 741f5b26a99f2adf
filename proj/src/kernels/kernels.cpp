#include "finevq/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace finevq::kernels {

namespace serial {
#define FINEVQ_PARALLEL_FOR
#include "kernels_impl.inc"
#undef FINEVQ_PARALLEL_FOR
}  // namespace serial

namespace omp {
#define FINEVQ_PARALLEL_FOR _Pragma("omp parallel for schedule(static)")
#include "kernels_impl.inc"
#undef FINEVQ_PARALLEL_FOR
}  // namespace omp

}  // namespace finevq::kernels
