#include <stdio.h>
#include <string.h>

#include "xplab.h"

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      return 1;                                                   \
    }                                                             \
  } while (0)

int main(void) {
  XplabGenus g;
  EXPECT(xplab_genus(7, &g) == XPLAB_STATUS_OK);
  EXPECT(g.genus == 3 && g.cusps == 24);
  EXPECT(xplab_genus(9, &g) == XPLAB_STATUS_DOMAIN);
  EXPECT(strlen(xplab_last_error()) > 0);

  XplabConfig *cfg = xplab_config_new();
  EXPECT(xplab_config_set(cfg, "p", "7,11") == XPLAB_STATUS_OK);
  EXPECT(xplab_config_set(cfg, "delta", "abc") == XPLAB_STATUS_DOMAIN);

  XplabReport *rep = NULL;
  EXPECT(xplab_verify(cfg, "geometry", &rep) == XPLAB_STATUS_OK);
  XplabSummary s;
  EXPECT(xplab_report_summary(rep, &s) == XPLAB_STATUS_OK);
  EXPECT(s.total == 14 && s.fail == 2 && s.exit_code == 1);

  XplabCheckStatus st;
  double lhs, rhs;
  EXPECT(xplab_report_check(rep, 0, &st, &lhs, &rhs) == XPLAB_STATUS_OK);
  EXPECT(st == XPLAB_CHECK_STATUS_PASS);
  EXPECT(xplab_report_check(rep, 99, &st, NULL, NULL) == XPLAB_STATUS_OUT_OF_BOUNDS);

  char *json = NULL;
  EXPECT(xplab_report_json(rep, &json) == XPLAB_STATUS_OK);
  EXPECT(strstr(json, "\"schema_version\": 1") != NULL);
  xplab_string_free(json);

  xplab_report_free(rep);
  xplab_config_free(cfg);
  printf("ok\n");
  return 0;
}
