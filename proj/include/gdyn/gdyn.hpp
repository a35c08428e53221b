#pragma once

#include "rational.hpp"
#include "linops.hpp"
#include "random.hpp"
#include "report.hpp"
#include "rewrite.hpp"
#include "dynamics.hpp"
#include "extend.hpp"
#include "channel.hpp"
#include "dilate.hpp"
#include "io.hpp"
#include "demos.hpp"
