#pragma once

#include "tensorattn/attention_inputs.hpp"
#include "tensorattn/baselines.hpp"
#include "tensorattn/bench.hpp"
#include "tensorattn/checksum.hpp"
#include "tensorattn/dense.hpp"
#include "tensorattn/error.hpp"
#include "tensorattn/lu.hpp"
#include "tensorattn/matrix_functions.hpp"
#include "tensorattn/mechanisms.hpp"
#include "tensorattn/oracle.hpp"
#include "tensorattn/random.hpp"
#include "tensorattn/scalar.hpp"
#include "tensorattn/tensor_attention.hpp"
#include "tensorattn/tensor_interaction.hpp"
#include "tensorattn/transformer.hpp"
#include "tensorattn/verify.hpp"
