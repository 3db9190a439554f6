#include "wildannot/parallel.hpp"

#include <omp.h>

namespace wildannot {
namespace {
int g_default_jobs = 0;
}

void set_num_jobs(int jobs) {
  if (g_default_jobs == 0) g_default_jobs = omp_get_max_threads();
  omp_set_num_threads(jobs > 0 ? jobs : g_default_jobs);
}

int num_jobs() { return omp_get_max_threads(); }

}  // namespace wildannot
