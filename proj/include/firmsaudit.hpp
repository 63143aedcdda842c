#pragma once

#include "firmsaudit/audit.hpp"
#include "firmsaudit/brightness.hpp"
#include "firmsaudit/error.hpp"
#include "firmsaudit/firms_api.hpp"
#include "firmsaudit/qc.hpp"
#include "firmsaudit/query.hpp"
#include "firmsaudit/random.hpp"
#include "firmsaudit/records.hpp"
#include "firmsaudit/reference.hpp"
#include "firmsaudit/report.hpp"
#include "firmsaudit/resample.hpp"
#include "firmsaudit/spacetime.hpp"
#include "firmsaudit/special.hpp"
#include "firmsaudit/stats.hpp"
#include "firmsaudit/synthgen.hpp"
#include "firmsaudit/treelearn.hpp"
#include "firmsaudit/verify.hpp"
