/* Generated kernel.
 *   vals[0] = A_vals
 *   vals[1] = x_vals
 *   pos[0] = A2_pos
 *   crd[0] = A2_crd
 *   out = y_vals
 *   dims[0] = A1_dimension
 *   dims[1] = A2_dimension
 *   dims[2] = x1_dimension
 */
#include <stdint.h>
#include <string.h>

/* Largest q in [lo, hi) with a[q] <= key; lo - 1 if none. */
static int64_t spsched_segment_of(const int32_t* a, int64_t lo, int64_t hi, int64_t key) {
  int64_t first = lo;
  while (first < hi) {
    int64_t mid = first + (hi - first) / 2;
    if (a[mid] <= key) first = mid + 1; else hi = mid;
  }
  return first - 1;
}

void compute(double* out, const double** vals, const int32_t** pos, const int32_t** crd, const int32_t* dims) {
  const double* A_vals = vals[0];
  const double* x_vals = vals[1];
  const int32_t* A2_pos = pos[0];
  const int32_t* A2_crd = crd[0];
  double* y_vals = out;
  const int64_t A1_dimension = dims[0];
  memset(y_vals, 0, sizeof(double) * (A1_dimension));
  int64_t pA1 = spsched_segment_of(A2_pos, 0, A1_dimension, 0);
  for (int64_t fpos = 0; fpos < A2_pos[A1_dimension]; fpos++) {
    while (A2_pos[pA1 + 1] <= fpos) {
      pA1 = pA1 + 1;
    }
    int64_t i = pA1;
    int64_t j = A2_crd[fpos];
    y_vals[i] += A_vals[fpos] * x_vals[j];
  }
}
