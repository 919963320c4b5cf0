#pragma once

#include "tlaw/version.hpp"
#include "tlaw/error.hpp"
#include "tlaw/numerics.hpp"
#include "tlaw/panel.hpp"
#include "tlaw/estimator.hpp"
#include "tlaw/asymptotics.hpp"
#include "tlaw/random.hpp"
#include "tlaw/simulation.hpp"
#include "tlaw/diagnostics.hpp"
#include "tlaw/io.hpp"
