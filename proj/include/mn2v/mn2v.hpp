#pragma once

#include "mn2v/alias_table.hpp"
#include "mn2v/dense_matrix.hpp"
#include "mn2v/error.hpp"
#include "mn2v/evaluation.hpp"
#include "mn2v/factorization.hpp"
#include "mn2v/generators.hpp"
#include "mn2v/io.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/pipeline.hpp"
#include "mn2v/rng.hpp"
#include "mn2v/skipgram.hpp"
#include "mn2v/walk.hpp"
