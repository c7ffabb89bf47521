#pragma once

#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"
#include "rmor/random.hpp"
#include "rmor/sketch.hpp"
#include "rmor/pod.hpp"
#include "rmor/deim.hpp"
#include "rmor/dmd.hpp"
#include "rmor/rom.hpp"
#include "rmor/models.hpp"
#include "rmor/io.hpp"
#include "rmor/bench.hpp"
