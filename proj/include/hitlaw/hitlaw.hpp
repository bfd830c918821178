#pragma once

#include "hitlaw/error.hpp"
#include "hitlaw/numeric.hpp"
#include "hitlaw/sft.hpp"
#include "hitlaw/window_set.hpp"
#include "hitlaw/measures.hpp"
#include "hitlaw/families.hpp"
#include "hitlaw/window_chain.hpp"
#include "hitlaw/oracle.hpp"
#include "hitlaw/lemmas.hpp"
#include "hitlaw/rng.hpp"
#include "hitlaw/parallel.hpp"
#include "hitlaw/monte_carlo.hpp"
#include "hitlaw/hypotheses.hpp"
#include "hitlaw/io.hpp"
#include "hitlaw/experiment.hpp"
