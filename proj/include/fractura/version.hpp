#pragma once

#define FRACTURA_VERSION "0.1.0"
