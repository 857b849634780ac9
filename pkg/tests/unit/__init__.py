"""
Pruebas unitarias del sistema
"""
