#pragma once

#include "shotlearn/analysis.hpp"
#include "shotlearn/circuit.hpp"
#include "shotlearn/config.hpp"
#include "shotlearn/experiments.hpp"
#include "shotlearn/features.hpp"
#include "shotlearn/fourier.hpp"
#include "shotlearn/io.hpp"
#include "shotlearn/learner.hpp"
#include "shotlearn/rng.hpp"
#include "shotlearn/sampling.hpp"
#include "shotlearn/stats.hpp"
