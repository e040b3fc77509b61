# LARS Backend Application

