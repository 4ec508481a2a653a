#pragma once

#include "fruitwm/assignment.hpp"
#include "fruitwm/geometry.hpp"
#include "fruitwm/io.hpp"
#include "fruitwm/metrics.hpp"
#include "fruitwm/perception.hpp"
#include "fruitwm/pipeline.hpp"
#include "fruitwm/simulator.hpp"
#include "fruitwm/worldmodel.hpp"
