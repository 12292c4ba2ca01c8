#include <math.h>
#include <stdio.h>
#include <string.h>

#include "sdclip.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,          \
              sdc_last_error_message());                              \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  SdcController *ctl = NULL;
  double level = 0.0;
  CHECK(sdc_controller_new(1e-4, 0.1, 0.05, &ctl) == SDC_STATUS_OK);
  CHECK(sdc_controller_update(ctl, 1e-5) == SDC_STATUS_OK);
  CHECK(sdc_controller_level(ctl, &level) == SDC_STATUS_OK);
  CHECK(fabs(level - (log(9999.0) - 0.1 * log(10.0))) < 1e-12);
  sdc_controller_free(ctl);

  SdcDetector *det = NULL;
  CHECK(sdc_detector_new(2, 1, &det) == SDC_STATUS_OK);
  SdcComplex r = {1.0, 0.0};
  SdcComplex y = {0.3, 0.0};
  double llr = 0.0;
  uint64_t nodes = 0;
  CHECK(sdc_detector_detect(det, &r, &y, 0.5, INFINITY, &llr, 1, &nodes) == SDC_STATUS_OK);
  CHECK(fabs(llr - 1.2) < 1e-12 && nodes == 2);
  sdc_detector_free(det);

  CHECK(sdc_controller_new(0.9, 0.1, 0.05, &ctl) == SDC_STATUS_INVALID_ARGUMENT);
  CHECK(strlen(sdc_last_error_message()) > 0);

  printf("ok %s\n", sdc_version());
  return 0;
}
