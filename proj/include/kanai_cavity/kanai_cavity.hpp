#pragma once

#include "kanai_cavity/core/friction.hpp"
#include "kanai_cavity/core/oscillator.hpp"
#include "kanai_cavity/error.hpp"
#include "kanai_cavity/kanai.hpp"
#include "kanai_cavity/paraxial.hpp"
#include "kanai_cavity/raysim.hpp"
#include "kanai_cavity/schedule.hpp"
#include "kanai_cavity/wavesim/collapse.hpp"
#include "kanai_cavity/wavesim/field.hpp"
#include "kanai_cavity/wavesim/fresnel.hpp"
#include "kanai_cavity/wavesim/gaussian.hpp"
#include "kanai_cavity/wavesim/snapshot.hpp"
#include "kanai_cavity/wavesim/split_step.hpp"
