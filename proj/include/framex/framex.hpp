#pragma once

#include "framex/linalg.hpp"
#include "framex/random.hpp"
#include "framex/frame.hpp"
#include "framex/selection.hpp"
#include "framex/extraction.hpp"
#include "framex/infinite.hpp"
#include "framex/counterexamples.hpp"
