#include <stdio.h>
#include <string.h>
#include "prank.h"

#define CHECK(cond)                                                    \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                        \
    }                                                                  \
  } while (0)

int main(void) {
  PrankField *f = NULL;
  CHECK(prank_field_new(9, &f) == PRANK_STATUS_OK);
  CHECK(prank_field_characteristic(f) == 3);
  uint32_t r = 0;
  CHECK(prank_field_op(f, PRANK_FIELD_OP_INV, 0, 0, &r) == PRANK_STATUS_INVALID_ARGUMENT);
  CHECK(prank_last_error() != NULL);
  prank_field_free(f);

  char *json = NULL;
  CHECK(prank_bounds_right_angle(3, 4, &json) == PRANK_STATUS_OK);
  CHECK(strstr(json, "\"value\":42") != NULL);
  prank_string_free(json);

  PrankCertificate *cert = NULL;
  char *report = NULL;
  CHECK(prank_decompose_jk(3, 5, 1, &cert, &report) == PRANK_STATUS_OK);
  CHECK(prank_certificate_term_count(cert) <= 52);
  prank_string_free(report);

  PrankTensor *target = NULL;
  CHECK(prank_tensor_builtin("jk", 5, 3, 5, &target) == PRANK_STATUS_OK);
  CHECK(prank_certificate_verify(cert, target, NULL) == PRANK_STATUS_OK);
  size_t diag[4] = {0, 0, 0, 0};
  CHECK(prank_tensor_get(target, diag, 4, &r) == PRANK_STATUS_OK);
  CHECK(r == 1);

  PrankTensor *other = NULL;
  CHECK(prank_tensor_builtin("fk", 5, 3, 5, &other) == PRANK_STATUS_OK);
  CHECK(prank_certificate_verify(cert, other, NULL) == PRANK_STATUS_MISMATCH);
  prank_tensor_free(other);
  prank_tensor_free(target);
  prank_certificate_free(cert);

  uint32_t pts[6] = {0, 0, 1, 0, 0, 1};
  CHECK(prank_find_corner(3, 2, 2, pts, 3, &json) == PRANK_STATUS_OK);
  CHECK(strstr(json, "\"apex\":[0,0]") != NULL);
  prank_string_free(json);

  printf("ok %s\n", prank_version());
  return 0;
}
