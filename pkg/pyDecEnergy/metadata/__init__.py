"""Package metadata"""
