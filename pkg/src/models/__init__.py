# Models module

