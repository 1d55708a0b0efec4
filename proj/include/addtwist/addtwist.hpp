#pragma once

#include "addtwist/cache.hpp"
#include "addtwist/characters.hpp"
#include "addtwist/config.hpp"
#include "addtwist/cutoff.hpp"
#include "addtwist/forms.hpp"
#include "addtwist/orbits.hpp"
#include "addtwist/report.hpp"
#include "addtwist/stats.hpp"
#include "addtwist/twist_eval.hpp"
#include "addtwist/verify.hpp"
