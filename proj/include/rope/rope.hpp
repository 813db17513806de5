#pragma once

#include "rope/baselines.hpp"
#include "rope/error.hpp"
#include "rope/estimator.hpp"
#include "rope/evaluation.hpp"
#include "rope/generators.hpp"
#include "rope/io.hpp"
#include "rope/signal_core.hpp"
#include "rope/version.hpp"
