# File output for models, reports and derivations
