"""
Suite de pruebas del proyecto
"""
